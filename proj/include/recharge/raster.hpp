#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "recharge/geometry.hpp"

namespace recharge {

// Affine rescaling applied to a covariate: standardized = (raw - offset) / divisor.
struct ScaleRecord {
  double offset = 0.0;
  double divisor = 1.0;
};

// Gridded spatial covariate. Values are stored row-major with row 0 at the
// northern edge, following the ASCII grid convention. The origin is the
// lower-left (south-west) corner of the grid extent.
//
// Evaluation uses bilinear interpolation between cell centers, so the
// interpolable region is the rectangle spanned by the outermost cell centers.
class CovariateField {
 public:
  CovariateField(std::string name, std::size_t n_cols, std::size_t n_rows, double origin_x,
                 double origin_y, double cell_size, std::vector<double> values,
                 ScaleRecord scale = {});

  const std::string& name() const { return name_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t n_rows() const { return n_rows_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double cell_size() const { return cell_size_; }
  const std::vector<double>& values() const { return values_; }
  const ScaleRecord& scale_record() const { return scale_; }

  double value(std::size_t col, std::size_t row) const { return values_[row * n_cols_ + col]; }
  Point cell_center(std::size_t col, std::size_t row) const;

  // True when every value is exactly 0 or 1.
  bool is_indicator() const;

  bool can_interpolate(Point p) const;
  // Central differences need p +/- cell_size/2 in both axes.
  bool can_differentiate(Point p) const;

  // Throws OutOfBoundsError outside the interpolable region.
  double interpolate(Point p) const;
  Point gradient(Point p) const;

  CovariateField with_name(std::string name) const;
  // Applies the rescaling on top of any existing record.
  CovariateField rescaled(ScaleRecord scale) const;

 private:
  double interpolate_unchecked(Point p) const;

  std::string name_;
  std::size_t n_cols_;
  std::size_t n_rows_;
  double origin_x_;
  double origin_y_;
  double cell_size_;
  std::vector<double> values_;
  ScaleRecord scale_;
};

// Closed polygon ring. Vertices are stored without repeating the first point.
struct Polygon {
  std::vector<Point> vertices;

  // Throws ValidationError for fewer than 3 vertices, zero area or
  // self-intersection.
  void validate() const;
  // Even-odd rule; points on the boundary count as inside.
  bool contains(Point p) const;
  // Distance to the nearest boundary point; 0 inside.
  double distance(Point p) const;
};

CovariateField load_ascii_grid(const std::filesystem::path& path);
CovariateField parse_ascii_grid(const std::string& text, const std::string& name);
void write_ascii_grid(const CovariateField& field, const std::filesystem::path& path);

// CSV of "x,y" rows; an optional non-numeric header line is skipped.
Polygon load_polygon_csv(const std::filesystem::path& path);
void write_polygon_csv(const Polygon& poly, const std::filesystem::path& path);

inline double interpolate(const CovariateField& field, Point p) { return field.interpolate(p); }
inline Point gradient(const CovariateField& field, Point p) { return field.gradient(p); }

double point_segment_distance(Point p, Point a, Point b);

CovariateField distance_to_polygon(const Polygon& poly, const CovariateField& template_field,
                                   std::string name = "distance");
CovariateField indicator_in_polygon(const Polygon& poly, const CovariateField& template_field,
                                    std::string name = "indicator");

// Mean gradient norm of the field along the given positions.
double mean_slope(const CovariateField& field, std::span<const Point> path);

// Divides the field by its mean slope along the path so the standardized
// covariate has unit mean slope. Indicator fields are returned unchanged.
CovariateField standardize_for_trajectory(const CovariateField& field, std::span<const Point> path);

}  // namespace recharge
