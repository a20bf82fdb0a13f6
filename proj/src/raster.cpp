#include "recharge/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "recharge/errors.hpp"
#include "recharge/text.hpp"

namespace recharge {

namespace {

constexpr double kEdgeTolerance = 1e-9;

}  // namespace

CovariateField::CovariateField(std::string name, std::size_t n_cols, std::size_t n_rows,
                               double origin_x, double origin_y, double cell_size,
                               std::vector<double> values, ScaleRecord scale)
    : name_(std::move(name)),
      n_cols_(n_cols),
      n_rows_(n_rows),
      origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      values_(std::move(values)),
      scale_(scale) {
  if (n_cols_ < 2 || n_rows_ < 2)
    throw ValidationError("covariate '" + name_ + "' needs at least 2 columns and 2 rows");
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_))
    throw ValidationError("covariate '" + name_ + "' has non-positive cell size");
  if (values_.size() != n_cols_ * n_rows_)
    throw ValidationError("covariate '" + name_ + "' value count does not match its dimensions");
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }))
    throw ValidationError("covariate '" + name_ + "' contains non-finite values");
  if (!(scale_.divisor > 0.0))
    throw ValidationError("covariate '" + name_ + "' has non-positive scale divisor");
}

Point CovariateField::cell_center(std::size_t col, std::size_t row) const {
  return {origin_x_ + (static_cast<double>(col) + 0.5) * cell_size_,
          origin_y_ + (static_cast<double>(n_rows_ - row) - 0.5) * cell_size_};
}

bool CovariateField::is_indicator() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

bool CovariateField::can_interpolate(Point p) const {
  const double u = (p.x - origin_x_) / cell_size_ - 0.5;
  const double v = (p.y - origin_y_) / cell_size_ - 0.5;
  return u >= -kEdgeTolerance && u <= static_cast<double>(n_cols_ - 1) + kEdgeTolerance &&
         v >= -kEdgeTolerance && v <= static_cast<double>(n_rows_ - 1) + kEdgeTolerance;
}

bool CovariateField::can_differentiate(Point p) const {
  const double h = 0.5 * cell_size_;
  return can_interpolate({p.x - h, p.y - h}) && can_interpolate({p.x + h, p.y + h});
}

double CovariateField::interpolate_unchecked(Point p) const {
  // u runs east from the western cell-center column, v runs north from the
  // southern cell-center row.
  double u = (p.x - origin_x_) / cell_size_ - 0.5;
  double v = (p.y - origin_y_) / cell_size_ - 0.5;
  const double max_u = static_cast<double>(n_cols_ - 1);
  const double max_v = static_cast<double>(n_rows_ - 1);
  u = std::clamp(u, 0.0, max_u);
  v = std::clamp(v, 0.0, max_v);
  auto c0 = std::min(static_cast<std::size_t>(u), n_cols_ - 2);
  auto s0 = std::min(static_cast<std::size_t>(v), n_rows_ - 2);
  const double fu = u - static_cast<double>(c0);
  const double fv = v - static_cast<double>(s0);
  const std::size_t row_south = n_rows_ - 1 - s0;
  const std::size_t row_north = row_south - 1;
  const double sw = value(c0, row_south);
  const double se = value(c0 + 1, row_south);
  const double nw = value(c0, row_north);
  const double ne = value(c0 + 1, row_north);
  return (1.0 - fv) * ((1.0 - fu) * sw + fu * se) + fv * ((1.0 - fu) * nw + fu * ne);
}

double CovariateField::interpolate(Point p) const {
  if (!can_interpolate(p)) {
    std::ostringstream msg;
    msg << "position (" << p.x << ", " << p.y << ") is outside covariate '" << name_ << "'";
    throw OutOfBoundsError(msg.str());
  }
  return interpolate_unchecked(p);
}

Point CovariateField::gradient(Point p) const {
  if (!can_differentiate(p)) {
    std::ostringstream msg;
    msg << "gradient at (" << p.x << ", " << p.y << ") leaves covariate '" << name_ << "'";
    throw OutOfBoundsError(msg.str());
  }
  const double h = 0.5 * cell_size_;
  const double dx =
      (interpolate_unchecked({p.x + h, p.y}) - interpolate_unchecked({p.x - h, p.y})) / (2.0 * h);
  const double dy =
      (interpolate_unchecked({p.x, p.y + h}) - interpolate_unchecked({p.x, p.y - h})) / (2.0 * h);
  return {dx, dy};
}

CovariateField CovariateField::with_name(std::string name) const {
  CovariateField out = *this;
  out.name_ = std::move(name);
  return out;
}

CovariateField CovariateField::rescaled(ScaleRecord scale) const {
  if (!(scale.divisor > 0.0)) throw ValidationError("scale divisor must be positive");
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(),
                 [&](double x) { return (x - scale.offset) / scale.divisor; });
  ScaleRecord combined{scale_.offset + scale.offset * scale_.divisor,
                       scale_.divisor * scale.divisor};
  return CovariateField(name_, n_cols_, n_rows_, origin_x_, origin_y_, cell_size_, std::move(v),
                        combined);
}

// ---------------------------------------------------------------------------
// Polygon

double point_segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = squared_norm(ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool on_segment(Point p, Point a, Point b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(p1, q1, q2)) return true;
  if (d2 == 0 && on_segment(p2, q1, q2)) return true;
  if (d3 == 0 && on_segment(q1, p1, p2)) return true;
  if (d4 == 0 && on_segment(q2, p1, p2)) return true;
  return false;
}

}  // namespace

void Polygon::validate() const {
  const std::size_t n = vertices.size();
  if (n < 3) throw ValidationError("polygon needs at least 3 distinct vertices");
  double area2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = vertices[i];
    const Point b = vertices[(i + 1) % n];
    if (!std::isfinite(a.x) || !std::isfinite(a.y))
      throw ValidationError("polygon has a non-finite vertex");
    area2 += a.x * b.y - b.x * a.y;
  }
  if (area2 == 0.0) throw ValidationError("polygon has zero area");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      // Adjacent edges share a vertex by construction.
      if (k == i + 1 || (i == 0 && k == n - 1)) continue;
      if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[k],
                             vertices[(k + 1) % n]))
        throw ValidationError("polygon edges " + std::to_string(i) + " and " +
                              std::to_string(k) + " intersect");
    }
  }
}

bool Polygon::contains(Point p) const {
  const std::size_t n = vertices.size();
  bool inside = false;
  for (std::size_t i = 0, k = n - 1; i < n; k = i++) {
    const Point a = vertices[i];
    const Point b = vertices[k];
    if (cross(a, b, p) == 0.0 && on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double Polygon::distance(Point p) const {
  if (contains(p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, vertices[i], vertices[(i + 1) % n]));
  return best;
}

namespace {

template <class F>
CovariateField map_cells(const CovariateField& tmpl, std::string name, F&& f) {
  std::vector<double> v(tmpl.n_cols() * tmpl.n_rows());
  for (std::size_t r = 0; r < tmpl.n_rows(); ++r)
    for (std::size_t c = 0; c < tmpl.n_cols(); ++c) v[r * tmpl.n_cols() + c] = f(tmpl.cell_center(c, r));
  return CovariateField(std::move(name), tmpl.n_cols(), tmpl.n_rows(), tmpl.origin_x(),
                        tmpl.origin_y(), tmpl.cell_size(), std::move(v));
}

void check_overlap(const Polygon& poly, const CovariateField& tmpl) {
  const double x0 = tmpl.origin_x();
  const double y0 = tmpl.origin_y();
  const double x1 = x0 + tmpl.cell_size() * static_cast<double>(tmpl.n_cols());
  const double y1 = y0 + tmpl.cell_size() * static_cast<double>(tmpl.n_rows());
  double px0 = poly.vertices[0].x, px1 = px0, py0 = poly.vertices[0].y, py1 = py0;
  for (const auto& v : poly.vertices) {
    px0 = std::min(px0, v.x);
    px1 = std::max(px1, v.x);
    py0 = std::min(py0, v.y);
    py1 = std::max(py1, v.y);
  }
  if (px1 < x0 || px0 > x1 || py1 < y0 || py0 > y1)
    throw ValidationError("polygon does not overlap the template grid extent");
}

}  // namespace

CovariateField distance_to_polygon(const Polygon& poly, const CovariateField& template_field,
                                   std::string name) {
  poly.validate();
  check_overlap(poly, template_field);
  return map_cells(template_field, std::move(name), [&](Point p) { return poly.distance(p); });
}

CovariateField indicator_in_polygon(const Polygon& poly, const CovariateField& template_field,
                                    std::string name) {
  poly.validate();
  check_overlap(poly, template_field);
  return map_cells(template_field, std::move(name),
                   [&](Point p) { return poly.contains(p) ? 1.0 : 0.0; });
}

double mean_slope(const CovariateField& field, std::span<const Point> path) {
  if (path.empty()) throw ValidationError("mean slope needs a non-empty path");
  double total = 0.0;
  for (const auto& p : path) total += norm(field.gradient(p));
  return total / static_cast<double>(path.size());
}

CovariateField standardize_for_trajectory(const CovariateField& field, std::span<const Point> path) {
  if (field.is_indicator()) return field;
  const double slope = mean_slope(field, path);
  if (!(slope >= 1e-12))
    throw NumericError("covariate '" + field.name() +
                       "' has (near) zero mean slope along the trajectory");
  return field.rescaled({0.0, slope});
}

// ---------------------------------------------------------------------------
// File formats

CovariateField parse_ascii_grid(const std::string& content, const std::string& name) {
  std::istringstream in(content);
  static const char* const kRequired[] = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"};
  std::map<std::string, double> header;
  std::string token;
  std::streampos body_start = in.tellg();
  while (in >> token) {
    if (text::to_double(token)) break;  // first body value
    const std::string key = text::lower(token);
    const bool known = key == "nodata_value" ||
                       std::find_if(std::begin(kRequired), std::end(kRequired),
                                    [&](const char* k) { return key == k; }) != std::end(kRequired);
    if (!known) throw ParseError("grid '" + name + "': unknown header key '" + token + "'");
    std::string raw;
    if (!(in >> raw)) throw ParseError("grid '" + name + "': missing value for header key '" + key + "'");
    auto v = text::to_double(raw);
    if (!v) throw ParseError("grid '" + name + "': invalid value for header key '" + key + "'");
    if (header.count(key)) throw ParseError("grid '" + name + "': duplicate header key '" + key + "'");
    header[key] = *v;
    body_start = in.tellg();
  }
  for (const char* k : kRequired)
    if (!header.count(k)) throw ParseError("grid '" + name + "': missing header key '" + std::string(k) + "'");

  auto as_count = [&](const char* key) {
    const double v = header[key];
    if (!(v >= 2.0) || v != std::floor(v))
      throw ParseError("grid '" + name + "': header key '" + std::string(key) +
                       "' must be an integer >= 2");
    return static_cast<std::size_t>(v);
  };
  const std::size_t n_cols = as_count("ncols");
  const std::size_t n_rows = as_count("nrows");
  if (!(header["cellsize"] > 0.0))
    throw ParseError("grid '" + name + "': header key 'cellsize' must be positive");

  in.clear();
  in.seekg(body_start);
  std::vector<double> values;
  values.reserve(n_cols * n_rows);
  const bool has_nodata = header.count("nodata_value") > 0;
  const double nodata = has_nodata ? header["nodata_value"] : 0.0;
  while (in >> token) {
    auto v = text::to_double(token);
    if (!v || !std::isfinite(*v))
      throw ParseError("grid '" + name + "': non-numeric value '" + token + "' at cell " +
                       std::to_string(values.size()));
    if (has_nodata && *v == nodata)
      throw UnsupportedDataError("grid '" + name + "': nodata value at cell " +
                                 std::to_string(values.size()) +
                                 " (covariates must be complete)");
    values.push_back(*v);
  }
  if (values.size() != n_cols * n_rows)
    throw ParseError("grid '" + name + "': expected " + std::to_string(n_cols * n_rows) +
                     " values, found " + std::to_string(values.size()));
  return CovariateField(name, n_cols, n_rows, header["xllcorner"], header["yllcorner"],
                        header["cellsize"], std::move(values));
}

CovariateField load_ascii_grid(const std::filesystem::path& path) {
  const std::string content = text::read_file(path.string());
  return parse_ascii_grid(content, path.stem().string());
}

void write_ascii_grid(const CovariateField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write grid '" + path.string() + "'");
  out << "ncols " << field.n_cols() << "\n"
      << "nrows " << field.n_rows() << "\n"
      << "xllcorner " << text::format_double(field.origin_x()) << "\n"
      << "yllcorner " << text::format_double(field.origin_y()) << "\n"
      << "cellsize " << text::format_double(field.cell_size()) << "\n"
      << "NODATA_value -9999\n";
  for (std::size_t r = 0; r < field.n_rows(); ++r) {
    for (std::size_t c = 0; c < field.n_cols(); ++c) {
      if (c) out << ' ';
      out << text::format_double(field.value(c, r));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing grid '" + path.string() + "'");
}

Polygon load_polygon_csv(const std::filesystem::path& path) {
  const std::string content = text::read_file(path.string());
  std::istringstream in(content);
  std::string line;
  Polygon poly;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = text::trim(line);
    if (t.empty()) continue;
    auto cells = text::split(t, ',');
    if (cells.size() != 2)
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'x,y'");
    auto x = text::to_double(cells[0]);
    auto y = text::to_double(cells[1]);
    if (!x || !y) {
      if (poly.vertices.empty() && line_no == 1) continue;  // header
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-numeric vertex");
    }
    poly.vertices.push_back({*x, *y});
  }
  if (poly.vertices.size() > 1 && poly.vertices.front() == poly.vertices.back())
    poly.vertices.pop_back();
  poly.validate();
  return poly;
}

void write_polygon_csv(const Polygon& poly, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write polygon '" + path.string() + "'");
  out << "x,y\n";
  for (const auto& v : poly.vertices)
    out << text::format_double(v.x) << ',' << text::format_double(v.y) << '\n';
}

}  // namespace recharge
