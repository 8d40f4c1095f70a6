#pragma once

#include <span>
#include <vector>

namespace contrack {

// Axis-aligned box in normalized center form; coordinates are relative to
// the image size, so a full-image box is (0.5, 0.5, 1, 1). Pixel-space
// corner form appears only at the file-format boundary.
struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return cx - w / 2.0; }
  double top() const { return cy - h / 2.0; }
  double right() const { return cx + w / 2.0; }
  double bottom() const { return cy + h / 2.0; }
  double area() const { return w * h; }

  static Box from_corners(double l, double t, double r, double b);
};

// Throws ValidationError on negative extent or non-finite fields.
void validate_box(const Box& box);

struct OverlapResult {
  double value = 0.0;
  bool degenerate = false;  // the ratio's denominator vanished; value forced to 0
};

// Intersection over union in [0, 1]. Degenerate when both boxes have zero area.
OverlapResult iou_checked(const Box& a, const Box& b);
double iou(const Box& a, const Box& b);

// Generalized IoU in [-1, 1]: IoU minus the enclosing-box area not covered by
// the union, normalized by the enclosing-box area. Degenerate when the
// enclosing box has zero area.
OverlapResult giou_checked(const Box& a, const Box& b);
double giou(const Box& a, const Box& b);

using Embedding = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

// Unit-length copy; throws ValidationError on a zero (or near-zero) vector.
Embedding normalized(std::span<const double> v);

// Clamped to [-1, 1] against floating-point overshoot. Throws on dimension
// mismatch or a zero vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace contrack
