#include "contrack/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "contrack/errors.hpp"

namespace contrack {

Box Box::from_corners(double l, double t, double r, double b) {
  return Box{(l + r) / 2.0, (t + b) / 2.0, r - l, b - t};
}

void validate_box(const Box& box) {
  if (!std::isfinite(box.cx) || !std::isfinite(box.cy) || !std::isfinite(box.w) ||
      !std::isfinite(box.h)) {
    throw ValidationError("box has non-finite coordinates");
  }
  if (box.w < 0.0 || box.h < 0.0) {
    throw ValidationError("box has negative extent");
  }
}

namespace {

// All areas below come from the same corner values, so identical boxes give
// intersection == union bit-exactly and an IoU of exactly 1.
struct Corners {
  double l, t, r, b;
  explicit Corners(const Box& box)
      : l(box.left()), t(box.top()), r(box.right()), b(box.bottom()) {}
  double area() const { return (r - l) * (b - t); }
};

double intersection_area(const Corners& a, const Corners& b) {
  const double iw = std::min(a.r, b.r) - std::max(a.l, b.l);
  const double ih = std::min(a.b, b.b) - std::max(a.t, b.t);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

}  // namespace

OverlapResult iou_checked(const Box& a, const Box& b) {
  validate_box(a);
  validate_box(b);
  const Corners ca(a), cb(b);
  const double inter = intersection_area(ca, cb);
  const double uni = ca.area() + cb.area() - inter;
  if (uni <= 0.0) return {0.0, true};
  return {inter / uni, false};
}

double iou(const Box& a, const Box& b) { return iou_checked(a, b).value; }

OverlapResult giou_checked(const Box& a, const Box& b) {
  validate_box(a);
  validate_box(b);
  const Corners ca(a), cb(b);
  const double inter = intersection_area(ca, cb);
  const double uni = ca.area() + cb.area() - inter;
  const double ew = std::max(ca.r, cb.r) - std::min(ca.l, cb.l);
  const double eh = std::max(ca.b, cb.b) - std::min(ca.t, cb.t);
  const double enclosing = ew * eh;
  if (enclosing <= 0.0) return {0.0, true};
  const double iou_value = uni > 0.0 ? inter / uni : 0.0;
  return {iou_value - (enclosing - uni) / enclosing, false};
}

double giou(const Box& a, const Box& b) { return giou_checked(a, b).value; }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm(std::span<const double> v) {
  double sum = 0.0;
  for (const double x : v) sum += x * x;
  return std::sqrt(sum);
}

Embedding normalized(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ValidationError("cannot normalize a zero or non-finite vector");
  }
  Embedding out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: dimension mismatch");
  }
  if (a.empty()) throw ValidationError("cosine_similarity: empty vectors");
  const double na2 = dot(a, a);
  const double nb2 = dot(b, b);
  if (!(na2 > 0.0) || !(nb2 > 0.0)) {
    throw ValidationError("cosine_similarity: zero vector");
  }
  const double d = dot(a, b);
  // Cauchy-Schwarz holds exactly in the reals; when rounding pushes the
  // ratio past +-1 (identical vectors included) snap to the boundary.
  const double denom2 = na2 * nb2;
  if (d * d >= denom2) return d > 0.0 ? 1.0 : -1.0;
  return std::clamp(d / std::sqrt(denom2), -1.0, 1.0);
}

}  // namespace contrack
