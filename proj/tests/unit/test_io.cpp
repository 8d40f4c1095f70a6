#include <doctest.h>

#include <fstream>
#include <sstream>

#include "contrack/errors.hpp"
#include "contrack/io.hpp"
#include "test_support.hpp"

using namespace contrack;
using contrack::test::TempDir;
using contrack::test::slurp;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("ground-truth lines convert pixel corners to normalized centers") {
  TempDir dir("gt");
  const auto path = dir.path() / "gt.txt";
  write_file(path, "1,1,10,20,30,40,1,1,1.0\n");
  const auto frames = parse_mot_gt(path, 100, 100);
  REQUIRE(frames.size() == 1);
  REQUIRE(frames[0].size() == 1);
  const GtObject& obj = frames[0][0];
  CHECK(obj.track_id == 1);
  CHECK(obj.category == 1);
  CHECK(obj.box.left() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(obj.box.top() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(obj.box.right() == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(obj.box.bottom() == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("ground-truth parser edge cases") {
  TempDir dir("gt_edge");
  const auto empty = dir.path() / "empty.txt";
  write_file(empty, "");
  CHECK(parse_mot_gt(empty, 100, 100).empty());

  // Flag 0 rows are ignored entirely.
  const auto flagged = dir.path() / "flagged.txt";
  write_file(flagged, "1,1,0,0,10,10,0,1,1\n2,2,0,0,10,10,1,1,1\n");
  const auto frames = parse_mot_gt(flagged, 100, 100);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].empty());
  CHECK(frames[1].size() == 1);

  // Frames out of order are sorted on load.
  const auto shuffled = dir.path() / "shuffled.txt";
  write_file(shuffled, "3,1,0,0,10,10,1,1,1\n1,1,0,0,10,10,1,1,1\n");
  const auto sorted = parse_mot_gt(shuffled, 100, 100);
  REQUIRE(sorted.size() == 3);
  CHECK(sorted[0].size() == 1);
  CHECK(sorted[1].empty());
  CHECK(sorted[2].size() == 1);

  const auto bad = dir.path() / "bad.txt";
  write_file(bad, "1,1,0,0,10,10,1,1,1\n1,2,oops,0,10,10,1,1,1\n");
  CHECK_THROWS_WITH_AS(parse_mot_gt(bad, 100, 100), doctest::Contains("line 2"),
                       ValidationError);

  const auto short_line = dir.path() / "short.txt";
  write_file(short_line, "1,1,0,0\n");
  CHECK_THROWS_AS(parse_mot_gt(short_line, 100, 100), ValidationError);

  CHECK_THROWS_AS(parse_mot_gt(dir.path() / "missing.txt", 100, 100), IoError);
}

TEST_CASE("detections JSONL round-trips bitwise") {
  TempDir dir("dets");
  SimulatorConfig cfg;
  cfg.frames_per_video = 10;
  cfg.identities_per_video = 3;
  cfg.noise_sigma = 0.25;
  cfg.seed = 3;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  std::vector<std::pair<int, std::vector<Detection>>> frames;
  for (std::size_t f = 0; f < seq.det_frames.size(); ++f) {
    frames.emplace_back(static_cast<int>(f) + 1, seq.det_frames[f]);
  }
  const auto path = dir.path() / "dets.jsonl";
  write_detections_jsonl(path, frames);
  const auto parsed = parse_detections(path);
  REQUIRE(parsed.size() == frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    CHECK(parsed[f].first == frames[f].first);
    REQUIRE(parsed[f].second.size() == frames[f].second.size());
    for (std::size_t i = 0; i < frames[f].second.size(); ++i) {
      const Detection& a = frames[f].second[i];
      const Detection& b = parsed[f].second[i];
      CHECK(a.category_id == b.category_id);
      CHECK(a.score == b.score);
      CHECK(a.box.cx == b.box.cx);
      CHECK(a.box.cy == b.box.cy);
      CHECK(a.box.w == b.box.w);
      CHECK(a.box.h == b.box.h);
      CHECK(a.embedding == b.embedding);
    }
  }
}

TEST_CASE("detections parser rejects malformed lines with their number") {
  TempDir dir("dets_bad");
  const auto path = dir.path() / "dets.jsonl";

  write_file(path,
             R"({"frame":1,"category":1,"score":0.9,"box":[0.5,0.5,0.1,0.1],"embedding":[1,0]})"
             "\n"
             R"({"frame":2,"category":1,"score":0.9,"box":[0.5,0.5,0.1,0.1],"embedding":[1,0,0]})"
             "\n");
  CHECK_THROWS_WITH_AS(parse_detections(path), doctest::Contains("line 2"), ValidationError);

  write_file(path, R"({"frame":1,"category":1,"score":0.9,"box":[0.5,0.5,0.1,0.1]})" "\n");
  CHECK_THROWS_WITH_AS(parse_detections(path), doctest::Contains("embedding"),
                       ValidationError);

  write_file(path, "not json\n");
  CHECK_THROWS_AS(parse_detections(path), ValidationError);

  write_file(path, "");
  CHECK(parse_detections(path).empty());

  // One clean line parses alone.
  write_file(path,
             R"({"frame":1,"category":2,"score":0.75,"box":[0.5,0.5,0.1,0.1],"embedding":[0,1]})"
             "\n");
  const auto single = parse_detections(path);
  REQUIRE(single.size() == 1);
  CHECK(single[0].second[0].category_id == 2);
}

TEST_CASE("results files round-trip through write and parse") {
  TrackOutput output;
  output.frames.push_back({1,
                           {{2, 1, 0.875, Box{0.5, 0.5, 0.25, 0.125}},
                            {1, 1, 0.5, Box{0.25, 0.25, 0.125, 0.25}}}});
  output.frames.push_back({3, {{2, 1, 0.75, Box{0.625, 0.5, 0.25, 0.125}}}});

  TempDir dir("results");
  const auto path = dir.path() / "results.txt";
  write_results(path, output, 1024, 1024);
  const auto parsed = parse_mot_results(path, 1024, 1024);
  REQUIRE(parsed.size() == 3);
  REQUIRE(parsed[0].size() == 2);
  CHECK(parsed[0][0].instance_id == 1);  // sorted by id within a frame
  CHECK(parsed[0][1].instance_id == 2);
  CHECK(parsed[0][1].box.cx == 0.5);
  CHECK(parsed[0][1].box.w == 0.25);
  CHECK(parsed[0][1].score == 0.875);
  CHECK(parsed[1].empty());
  CHECK(parsed[2].size() == 1);
}

TEST_CASE("simulator exports round-trip exactly") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 12;
  cfg.identities_per_video = 3;
  cfg.noise_sigma = 0.1;
  cfg.seed = 21;
  const SyntheticDataset dataset = generate(cfg);
  TempDir dir("export");
  export_dataset(dataset, dir.path());

  const SceneMeta meta = parse_meta(dir.path() / "meta.json");
  CHECK(meta.image_width == 1024);
  CHECK(meta.seed == 21);

  const auto gt = parse_mot_gt(dir.path() / "gt.txt", meta.image_width, meta.image_height);
  const auto& seq = dataset.sequences.front();
  REQUIRE(gt.size() == seq.gt_frames.size());
  for (std::size_t f = 0; f < gt.size(); ++f) {
    REQUIRE(gt[f].size() == seq.gt_frames[f].size());
    for (std::size_t i = 0; i < gt[f].size(); ++i) {
      CHECK(gt[f][i].track_id == seq.gt_frames[f][i].track_id);
      // Dyadic coordinates and a power-of-two image size: bitwise equality.
      CHECK(gt[f][i].box.cx == seq.gt_frames[f][i].box.cx);
      CHECK(gt[f][i].box.cy == seq.gt_frames[f][i].box.cy);
      CHECK(gt[f][i].box.w == seq.gt_frames[f][i].box.w);
      CHECK(gt[f][i].box.h == seq.gt_frames[f][i].box.h);
    }
  }

  const auto dets = parse_detections(dir.path() / "dets.jsonl");
  std::size_t det_count = 0;
  for (const auto& [frame, list] : dets) det_count += list.size();
  std::size_t want_count = 0;
  for (const auto& list : seq.det_frames) want_count += list.size();
  CHECK(det_count == want_count);
}

TEST_CASE("export is byte-identical across runs") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 8;
  cfg.identities_per_video = 2;
  cfg.noise_sigma = 0.3;
  cfg.miss_probability = 0.2;
  cfg.false_positive_rate = 0.7;
  cfg.seed = 99;
  TempDir a("bytes_a");
  TempDir b("bytes_b");
  export_dataset(generate(cfg), a.path());
  export_dataset(generate(cfg), b.path());
  for (const char* name : {"gt.txt", "dets.jsonl", "meta.json"}) {
    CHECK(slurp(a.path() / name) == slurp(b.path() / name));
    CHECK(!slurp(a.path() / name).empty());
  }
}

TEST_CASE("empty scenes export header-free empty files") {
  SimulatorConfig cfg;
  cfg.identities_per_video = 0;
  cfg.frames_per_video = 5;
  TempDir dir("empty");
  export_dataset(generate(cfg), dir.path());
  CHECK(slurp(dir.path() / "gt.txt").empty());
  CHECK(slurp(dir.path() / "dets.jsonl").empty());
  CHECK(parse_mot_gt(dir.path() / "gt.txt", 1024, 1024).empty());
}

TEST_CASE("multi-video datasets export per-sequence directories") {
  SimulatorConfig cfg;
  cfg.videos = 3;
  cfg.frames_per_video = 4;
  cfg.identities_per_video = 2;
  TempDir dir("multi");
  export_dataset(generate(cfg), dir.path());
  for (const char* name : {"seq_0001", "seq_0002", "seq_0003"}) {
    CHECK(std::filesystem::exists(dir.path() / name / "gt.txt"));
    CHECK(std::filesystem::exists(dir.path() / name / "dets.jsonl"));
    CHECK(std::filesystem::exists(dir.path() / name / "meta.json"));
  }
}

TEST_CASE("dataset index parsing") {
  TempDir dir("index");
  const auto path = dir.path() / "index.json";
  write_file(path, R"({"videos":[{"video_id":1,"frame_ids":[1,2,3]},
                                 {"video_id":2,"frame_ids":[4,5]}]})");
  const DatasetIndex index = parse_dataset_index(path);
  REQUIRE(index.videos.size() == 2);
  CHECK(index.videos[0].frame_ids.size() == 3);
  CHECK(index.videos[1].video_id == 2);

  write_file(path, R"({"videos":[{"video_id":1}]})");
  CHECK_THROWS_AS(parse_dataset_index(path), ValidationError);
  write_file(path, R"({"nope":[]})");
  CHECK_THROWS_AS(parse_dataset_index(path), ValidationError);
  write_file(path, "{");
  CHECK_THROWS_AS(parse_dataset_index(path), ValidationError);
}

TEST_CASE("batch specs emit one JSON object per line") {
  BatchSpec batch;
  batch.items = {{4, 7, -1}, {4, 9, -1}};
  std::ostringstream out;
  write_batch_spec_jsonl(out, batch);
  CHECK(out.str() == "{\"frame\":7,\"video\":4}\n{\"frame\":9,\"video\":4}\n");

  BatchSpec views;
  views.items = {{2, 1, 0}, {2, 1, 1}};
  std::ostringstream out2;
  write_batch_spec_jsonl(out2, views);
  CHECK(out2.str() ==
        "{\"frame\":1,\"video\":2,\"view\":0}\n{\"frame\":1,\"video\":2,\"view\":1}\n");
}

TEST_CASE("scene loading aligns frame counts across both files") {
  TempDir dir("scene");
  write_file(dir.path() / "gt.txt", "1,1,100,100,50,50,1,1,1\n2,1,100,100,50,50,1,1,1\n");
  write_file(dir.path() / "results.txt", "1,7,100,100,50,50,0.9,-1,-1,-1\n");
  const LabeledScene scene = load_scene(dir.path() / "gt.txt", dir.path() / "results.txt",
                                        1000, 1000);
  REQUIRE(scene.frame_count() == 2);
  CHECK(scene.gt_frames[0].size() == 1);
  CHECK(scene.pred_frames[0].size() == 1);
  CHECK(scene.pred_frames[1].empty());
  const MetricsReport report = evaluate_scene(scene, 0.5);
  CHECK(report.overall.clear.fn == 1);
}

TEST_CASE("metrics report serializes to JSON and a table") {
  LabeledScene scene;
  scene.gt_frames.resize(2);
  scene.pred_frames.resize(2);
  for (int f = 0; f < 2; ++f) {
    scene.gt_frames[f].push_back({1, 1, Box{0.5, 0.5, 0.2, 0.2}});
    scene.pred_frames[f].push_back({9, 1, Box{0.5, 0.5, 0.2, 0.2}, 1.0});
  }
  const MetricsReport report = evaluate_scene(scene, 0.5);
  const std::string json = metrics_report_to_json(report);
  CHECK(json.find("\"MOTA\": 1.0") != std::string::npos);
  CHECK(json.find("\"mIDF1\": 1.0") != std::string::npos);
  const std::string table = metrics_report_table(report);
  CHECK(table.find("overall") != std::string::npos);
  CHECK(table.find("mMOTA 1.000") != std::string::npos);

  TempDir dir("report");
  write_metrics_report(dir.path() / "report.json", report);
  CHECK(!slurp(dir.path() / "report.json").empty());
}
