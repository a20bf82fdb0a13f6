#include "recharge/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recharge/errors.hpp"
#include "recharge/normal.hpp"
#include "recharge/text.hpp"

namespace recharge {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> lines_of(const std::string& body) {
  std::vector<std::string> out;
  std::istringstream is(body);
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  for (auto f : text::split(line, ',')) out.emplace_back(text::trim(f));
  return out;
}

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& body) {
  auto os = open_out(path);
  os << body;
  finish(os, path);
}

// --- telemetry --------------------------------------------------------------

TelemetrySet parse_telemetry(const std::string& body, const std::string& source) {
  const auto lines = lines_of(body);
  std::size_t i = 0;
  while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw ParseError(source + ": empty file");
  const auto header = fields_of(lines[i]);
  if (header.size() != 3 || text::lower(header[0]) != "time" || text::lower(header[1]) != "x" ||
      text::lower(header[2]) != "y")
    throw ParseError(source + ": header must be 'time,x,y'");
  TelemetrySet data;
  std::size_t row = 0;
  for (++i; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    ++row;
    const auto f = fields_of(lines[i]);
    if (f.size() != 3)
      throw ParseError(source + ": row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                       " fields, expected 3");
    double v[3];
    for (int c = 0; c < 3; ++c) {
      auto d = text::to_double(f[c]);
      if (!d || !std::isfinite(*d))
        throw ParseError(source + ": row " + std::to_string(row) + ", column '" + header[c] +
                         "': '" + f[c] + "' is not a finite number");
      v[c] = *d;
    }
    if (!data.fixes.empty() && v[0] <= data.fixes.back().time)
      throw ValidationError(source + ": row " + std::to_string(row) + ": time " + f[0] +
                            (v[0] == data.fixes.back().time ? " duplicates" : " precedes") +
                            " the previous row");
    data.fixes.push_back({v[0], {v[1], v[2]}});
  }
  data.validate();
  return data;
}

TelemetrySet load_telemetry(const std::filesystem::path& path) {
  return parse_telemetry(text::read_file(path.string()), path.string());
}

void write_telemetry(const TelemetrySet& data, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "time,x,y\n";
  for (const auto& f : data.fixes)
    os << fmt(f.time) << ',' << fmt(f.location.x) << ',' << fmt(f.location.y) << '\n';
  finish(os, path);
}

void write_truth(const SimulationResult& sim, const TimeGrid& grid, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "time,x,y,z,g\n";
  for (std::size_t j = 0; j < grid.size(); ++j)
    os << fmt(grid.time(j)) << ',' << fmt(sim.path[j].x) << ',' << fmt(sim.path[j].y) << ','
       << static_cast<int>(sim.recharge.z[j]) << ',' << fmt(sim.recharge.g[j]) << '\n';
  finish(os, path);
}

// --- samples ----------------------------------------------------------------

void write_samples_csv(const PosteriorSamples& s, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "# variant=" << to_string(s.variant) << '\n';
  for (std::size_t k = 0; k < s.beta_names.size(); ++k) {
    const ScaleRecord sc = k < s.beta_scales.size() ? s.beta_scales[k] : ScaleRecord{};
    os << "# scale." << s.beta_names[k] << '=' << fmt(sc.offset) << ',' << fmt(sc.divisor) << '\n';
  }
  os << "iteration,sigma2_s,sigma2_0,sigma2_1,g0";
  for (const auto& n : s.beta_names) os << ",beta." << n;
  for (const auto& n : s.theta_names) os << ",theta." << n;
  os << '\n';
  for (const auto& d : s.draws) {
    os << d.iteration << ',' << fmt(d.sigma2_s) << ',' << fmt(d.sigma2_0) << ',' << fmt(d.sigma2_1) << ','
       << fmt(d.g0);
    for (double b : d.beta) os << ',' << fmt(b);
    for (double t : d.theta) os << ',' << fmt(t);
    os << '\n';
  }
  finish(os, path);
}

void write_paths_csv(const PosteriorSamples& s, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "draw,time,x,y,g,z\n";
  for (std::size_t k = 0; k < s.draws.size(); ++k) {
    const auto& d = s.draws[k];
    for (std::size_t j = 0; j < d.path.size(); ++j)
      os << k << ',' << fmt(s.times[j]) << ',' << fmt(d.path[j].x) << ',' << fmt(d.path[j].y) << ','
         << fmt(j < d.g.size() ? d.g[j] : 0.0) << ',' << (j < d.z.size() ? static_cast<int>(d.z[j]) : 0)
         << '\n';
  }
  finish(os, path);
}

PosteriorSamples read_samples_csv(const std::filesystem::path& samples_path,
                                  const std::filesystem::path& paths_path) {
  const std::string src = samples_path.string();
  const auto lines = lines_of(text::read_file(src));
  PosteriorSamples s;
  std::map<std::string, ScaleRecord> scales;
  std::size_t i = 0;
  for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i) {
    const std::string body(text::trim(std::string_view(lines[i]).substr(1)));
    const auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = body.substr(0, eq), value = body.substr(eq + 1);
    if (key == "variant") {
      s.variant = parse_variant(value);
    } else if (key.rfind("scale.", 0) == 0) {
      const auto f = fields_of(value);
      auto o = f.size() == 2 ? text::to_double(f[0]) : std::nullopt;
      auto d = f.size() == 2 ? text::to_double(f[1]) : std::nullopt;
      if (!o || !d) throw ParseError(src + ": bad scale record '" + body + "'");
      scales[key.substr(6)] = {*o, *d};
    }
  }
  if (i == lines.size()) throw ParseError(src + ": missing header row");
  const auto header = fields_of(lines[i]);
  const std::vector<std::string> fixed = {"iteration", "sigma2_s", "sigma2_0", "sigma2_1", "g0"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin()))
    throw ParseError(src + ": header must start with " + "iteration,sigma2_s,sigma2_0,sigma2_1,g0");
  std::vector<int> kind(header.size(), 0);  // 1 beta, 2 theta
  for (std::size_t c = fixed.size(); c < header.size(); ++c) {
    if (header[c].rfind("beta.", 0) == 0) {
      kind[c] = 1;
      s.beta_names.push_back(header[c].substr(5));
      auto it = scales.find(s.beta_names.back());
      s.beta_scales.push_back(it == scales.end() ? ScaleRecord{} : it->second);
    } else if (header[c].rfind("theta.", 0) == 0) {
      kind[c] = 2;
      s.theta_names.push_back(header[c].substr(6));
    } else {
      throw ParseError(src + ": unexpected column '" + header[c] + "'");
    }
  }
  std::size_t row = 0;
  for (++i; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    ++row;
    const auto f = fields_of(lines[i]);
    if (f.size() != header.size())
      throw ParseError(src + ": row " + std::to_string(row) + " has the wrong number of fields");
    std::vector<double> v(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) {
      auto d = text::to_double(f[c]);
      if (!d) throw ParseError(src + ": row " + std::to_string(row) + ", column '" + header[c] + "' is not numeric");
      v[c] = *d;
    }
    ParameterDraw d;
    d.iteration = static_cast<std::size_t>(v[0]);
    d.sigma2_s = v[1];
    d.sigma2_0 = v[2];
    d.sigma2_1 = v[3];
    d.g0 = v[4];
    for (std::size_t c = fixed.size(); c < v.size(); ++c) (kind[c] == 1 ? d.beta : d.theta).push_back(v[c]);
    s.draws.push_back(std::move(d));
  }

  if (!paths_path.empty()) {
    const std::string psrc = paths_path.string();
    const auto plines = lines_of(text::read_file(psrc));
    if (plines.empty() || fields_of(plines[0]) != std::vector<std::string>{"draw", "time", "x", "y", "g", "z"})
      throw ParseError(psrc + ": header must be 'draw,time,x,y,g,z'");
    for (std::size_t r = 1; r < plines.size(); ++r) {
      if (text::trim(plines[r]).empty()) continue;
      const auto f = fields_of(plines[r]);
      double v[6];
      bool ok = f.size() == 6;
      for (std::size_t c = 0; ok && c < 6; ++c) {
        auto d = text::to_double(f[c]);
        ok = d.has_value();
        if (ok) v[c] = *d;
      }
      if (!ok) throw ParseError(psrc + ": row " + std::to_string(r) + " is malformed");
      const auto k = static_cast<std::size_t>(v[0]);
      if (k >= s.draws.size()) throw ParseError(psrc + ": row " + std::to_string(r) + " refers to a missing draw");
      auto& d = s.draws[k];
      if (k == 0) s.times.push_back(v[1]);
      d.path.push_back({v[2], v[3]});
      d.g.push_back(v[4]);
      d.z.push_back(v[5] != 0.0 ? 1 : 0);
    }
    for (const auto& d : s.draws)
      if (d.path.size() != s.times.size()) throw ParseError(psrc + ": draws have unequal path lengths");
  }
  return s;
}

// --- summaries --------------------------------------------------------------

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

void three(std::vector<double>& v, double out[3]) {
  out[0] = quantile(v, 0.5);
  out[1] = quantile(v, 0.025);
  out[2] = quantile(v, 0.975);
}

}  // namespace

std::vector<SummaryRow> summarize_paths(const PosteriorSamples& s) {
  if (s.draws.empty()) throw ValidationError("no draws to summarize");
  const std::size_t m = s.times.size();
  for (const auto& d : s.draws)
    if (d.path.size() != m) throw ValidationError("draws do not carry latent paths");
  const bool has_g = !s.draws.front().g.empty();
  std::vector<SummaryRow> rows(m);
  std::vector<double> xs(s.draws.size()), ys(xs.size()), gs(xs.size()), rs(xs.size());
  for (std::size_t j = 0; j < m; ++j) {
    double zsum = 0.0;
    for (std::size_t k = 0; k < s.draws.size(); ++k) {
      const auto& d = s.draws[k];
      xs[k] = d.path[j].x;
      ys[k] = d.path[j].y;
      gs[k] = has_g ? d.g[j] : 0.0;
      // rho is 1 when z is forced to 1 and 0 when forced to 0.
      if (s.variant == Variant::m1_only) rs[k] = 1.0;
      else if (s.variant == Variant::m0_only) rs[k] = 0.0;
      else rs[k] = decision_prob(gs[k]);
      zsum += d.z.empty() ? 0.0 : d.z[j];
    }
    auto& r = rows[j];
    r.time = s.times[j];
    three(xs, r.x);
    three(ys, r.y);
    three(gs, r.g);
    three(rs, r.rho);
    r.z_mean = zsum / static_cast<double>(s.draws.size());
  }
  return rows;
}

void write_summary_csv(std::span<const SummaryRow> rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "time";
  for (const char* v : {"x", "y", "g", "rho"}) os << ',' << v << "_median," << v << "_q025," << v << "_q975";
  os << ",z_mean\n";
  for (const auto& r : rows) {
    os << fmt(r.time);
    for (const double* q : {r.x, r.y, r.g, r.rho}) os << ',' << fmt(q[0]) << ',' << fmt(q[1]) << ',' << fmt(q[2]);
    os << ',' << fmt(r.z_mean) << '\n';
  }
  finish(os, path);
}

std::vector<ParameterSummary> summarize_parameters(const PosteriorSamples& s) {
  std::vector<ParameterSummary> out;
  if (s.draws.empty()) return out;
  auto add = [&](const std::string& name, auto get) {
    std::vector<double> v;
    v.reserve(s.draws.size());
    for (const auto& d : s.draws) v.push_back(get(d));
    ParameterSummary p;
    p.name = name;
    double sum = 0.0;
    for (double x : v) sum += x;
    p.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - p.mean) * (x - p.mean);
    p.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    p.lo = quantile(v, 0.025);
    p.median = quantile(v, 0.5);
    p.hi = quantile(v, 0.975);
    out.push_back(p);
  };
  add("sigma2_s", [](const ParameterDraw& d) { return d.sigma2_s; });
  if (s.variant != Variant::m1_only) add("sigma2_0", [](const ParameterDraw& d) { return d.sigma2_0; });
  if (s.variant != Variant::m0_only) add("sigma2_1", [](const ParameterDraw& d) { return d.sigma2_1; });
  if (has_recharge(s.variant)) add("g0", [](const ParameterDraw& d) { return d.g0; });
  for (std::size_t k = 0; k < s.beta_names.size(); ++k) {
    add("beta." + s.beta_names[k], [k](const ParameterDraw& d) { return d.beta[k]; });
    const double div = k < s.beta_scales.size() ? s.beta_scales[k].divisor : 1.0;
    if (div != 1.0) add("beta_raw." + s.beta_names[k], [k, div](const ParameterDraw& d) { return d.beta[k] / div; });
  }
  for (std::size_t k = 0; k < s.theta_names.size(); ++k)
    add("theta." + s.theta_names[k], [k](const ParameterDraw& d) { return d.theta[k]; });
  return out;
}

void write_parameter_summary(std::span<const ParameterSummary> rows, const std::filesystem::path& path) {
  auto os = open_out(path);
  os << "parameter,mean,sd,q025,median,q975\n";
  for (const auto& r : rows)
    os << r.name << ',' << fmt(r.mean) << ',' << fmt(r.sd) << ',' << fmt(r.lo) << ',' << fmt(r.median) << ','
       << fmt(r.hi) << '\n';
  finish(os, path);
}

// --- run outputs ------------------------------------------------------------

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
  const auto probe = dir / ".write-probe";
  {
    std::ofstream os(probe);
    if (!os) throw IoError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

void write_acceptance(const AcceptanceReport& acc, const std::filesystem::path& path) {
  std::ostringstream os;
  auto line = [&](const char* name, const AcceptanceCounter& c) {
    os << name << ".rate=" << fmt(c.rate()) << '\n'
       << name << ".proposed=" << c.proposed << '\n'
       << name << ".accepted=" << c.accepted << '\n';
  };
  line("position", acc.position);
  line("movement_block", acc.movement_block);
  line("recharge_block", acc.recharge_block);
  write_text(path, os.str());
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& [k, v] : manifest.entries) os << k << '=' << v << '\n';
  write_text(path, os.str());
}

void emit_results(const PosteriorSamples& samples, const RunManifest& manifest,
                  const std::filesystem::path& outdir, bool write_paths) {
  ensure_writable_dir(outdir);
  const bool with_paths = !samples.draws.empty() && !samples.draws.front().path.empty();
  // Compute everything before touching the output files.
  std::vector<SummaryRow> rows;
  if (with_paths) rows = summarize_paths(samples);
  const auto params = summarize_parameters(samples);

  RunManifest man = manifest;
  man.set("draws", std::to_string(samples.draws.size()));
  man.set("acceptance.position", fmt(samples.acceptance.position.rate()));
  man.set("acceptance.movement_block", fmt(samples.acceptance.movement_block.rate()));
  man.set("acceptance.recharge_block", fmt(samples.acceptance.recharge_block.rate()));

  write_samples_csv(samples, outdir / "samples.csv");
  if (with_paths) write_summary_csv(rows, outdir / "summary.csv");
  if (with_paths && write_paths) write_paths_csv(samples, outdir / "paths.csv");
  write_parameter_summary(params, outdir / "parameters.csv");
  write_acceptance(samples.acceptance, outdir / "acceptance.txt");
  write_manifest(man, outdir / "manifest.txt");
}

// --- scores -----------------------------------------------------------------

void write_score_csv(std::span<const ScoreReport> reports, const std::filesystem::path& path) {
  auto os = open_out(path);
  if (!reports.empty())
    os << "# fold_scheme=" << to_string(reports.front().scheme)
       << " folds=" << reports.front().fold_scores.size() << '\n';
  os << "model,fold,score\n";
  for (const auto& r : reports)
    for (std::size_t f = 0; f < r.fold_scores.size(); ++f) os << r.model << ',' << f << ',' << fmt(r.fold_scores[f]) << '\n';
  finish(os, path);
}

std::vector<ScoreReport> read_score_csv(const std::filesystem::path& path) {
  const std::string src = path.string();
  const auto lines = lines_of(text::read_file(src));
  FoldScheme scheme = FoldScheme::contiguous;
  std::vector<ScoreReport> out;
  bool header = false;
  std::size_t row = 0;
  for (const auto& raw : lines) {
    const auto line = text::trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("fold_scheme=");
      if (pos != std::string_view::npos) {
        auto rest = line.substr(pos + 12);
        scheme = parse_fold_scheme(std::string(rest.substr(0, rest.find(' '))));
      }
      continue;
    }
    if (!header) {
      if (fields_of(std::string(line)) != std::vector<std::string>{"model", "fold", "score"})
        throw ParseError(src + ": header must be 'model,fold,score'");
      header = true;
      continue;
    }
    ++row;
    const auto f = fields_of(std::string(line));
    auto fold = f.size() == 3 ? text::to_integer(f[1]) : std::nullopt;
    auto score = f.size() == 3 ? text::to_double(f[2]) : std::nullopt;
    if (!fold || !score || *fold < 0) throw ParseError(src + ": row " + std::to_string(row) + " is malformed");
    auto it = std::find_if(out.begin(), out.end(), [&](const ScoreReport& r) { return r.model == f[0]; });
    if (it == out.end()) {
      out.push_back({f[0], scheme, {}});
      it = out.end() - 1;
    }
    if (static_cast<std::size_t>(*fold) != it->fold_scores.size())
      throw ParseError(src + ": row " + std::to_string(row) + ": folds of '" + f[0] + "' are not in order");
    it->fold_scores.push_back(*score);
  }
  if (!header) throw ParseError(src + ": missing header row");
  return out;
}

std::string format_ranking(const Ranking& r) {
  std::ostringstream os;
  os << "rank  model                 pooled_score           fold_wins\n";
  for (std::size_t i = 0; i < r.models.size(); ++i) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-5zu %-21s %-22.10g %zu\n", i + 1, r.models[i].c_str(), r.pooled[i],
                  r.fold_wins[i]);
    os << buf;
  }
  if (r.tie) os << "note: the two best models tie on pooled score\n";
  return os.str();
}

}  // namespace recharge
