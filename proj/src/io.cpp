#include "splitplot/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace splitplot {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string location(std::size_t row, std::size_t col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col) + ": ";
}

double json_number(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    double out = 0.0;
    if (parse_number(trim(v.get<std::string>()), out)) return out;
  }
  throw InputError("expected a number, got " + v.dump());
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

LabeledData parse_dataset(std::string_view csv) {
  std::vector<std::string_view> lines = split(csv, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError("empty data file");

  const auto header = split(lines.front(), ',');
  if (header.size() < 2) throw InputError("header needs a group column and at least one time point");
  const std::size_t d = header.size() - 1;

  std::vector<std::string> labels;
  std::map<std::string, std::size_t, std::less<>> index;
  std::vector<std::vector<std::vector<double>>> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row_no = li + 1;
    if (lines[li].empty()) throw InputError(location(row_no, 1) + "blank line inside the data");
    const auto fields = split(lines[li], ',');
    if (fields.size() != d + 1)
      throw InputError(location(row_no, std::min(fields.size(), d + 1) + (fields.size() < d + 1 ? 1 : 0)) +
                       "expected " + std::to_string(d + 1) + " fields, found " + std::to_string(fields.size()));
    const std::string_view label = unquote(fields[0]);
    if (label.empty()) throw InputError(location(row_no, 1) + "missing group label");
    auto it = index.find(label);
    if (it == index.end()) {
      it = index.emplace(std::string(label), labels.size()).first;
      labels.emplace_back(label);
      rows.emplace_back();
    }
    std::vector<double> values(d);
    for (std::size_t c = 0; c < d; ++c) {
      const auto cell = fields[c + 1];
      if (cell.empty()) throw InputError(location(row_no, c + 2) + "missing value");
      if (!parse_number(cell, values[c]) || !std::isfinite(values[c]))
        throw InputError(location(row_no, c + 2) + "not a finite number: '" + std::string(cell) + "'");
    }
    rows[it->second].push_back(std::move(values));
  }
  if (rows.empty()) throw InputError("data file has a header but no observations");

  std::vector<RowMatrix> groups;
  groups.reserve(rows.size());
  for (const auto& g : rows) {
    RowMatrix m(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < g.size(); ++r)
      for (std::size_t c = 0; c < d; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g[r][c];
    groups.push_back(std::move(m));
  }
  return {DataSet(std::move(groups)), std::move(labels)};
}

std::string serialize_dataset(const DataSet& data, const std::vector<std::string>& labels) {
  const auto& design = data.design();
  if (labels.size() != design.groups()) throw InputError("one label per group is required");
  std::string out = "group";
  for (std::size_t t = 0; t < design.dim(); ++t) out += ",t" + std::to_string(t + 1);
  out += '\n';
  for (std::size_t i = 0; i < design.groups(); ++i) {
    const auto& g = data.group(i);
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      out += labels[i];
      for (Eigen::Index c = 0; c < g.cols(); ++c) {
        out += ',';
        out += format_double(g(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

LabeledData read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open data file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw InputError("empty entry in list '" + std::string(text) + "'");
    const auto parse_one = [&](std::string_view s) {
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("not a count: '" + std::string(s) + "'");
      return v;
    };
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const auto lo = parse_one(trim(item.substr(0, dots)));
      const auto hi = parse_one(trim(item.substr(dots + 2)));
      if (hi < lo) throw InputError("empty range '" + std::string(item) + "'");
      for (auto v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      out.push_back(parse_one(item));
    }
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (auto item : split(text, ',')) {
    double v = 0.0;
    if (!parse_number(item, v)) throw InputError("not a number: '" + std::string(item) + "'");
    out.push_back(v);
  }
  return out;
}

CovarianceModel parse_covariance(std::string_view text, std::size_t d) {
  text = trim(text);
  if (text == "identity") return CovarianceModel::identity(d);
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto kind = text.substr(0, colon);
    double rho = 0.0;
    if (!parse_number(trim(text.substr(colon + 1)), rho)) throw InputError("bad covariance parameter in '" + std::string(text) + "'");
    if (kind == "ar") return CovarianceModel::autoregressive(d, rho);
    if (kind == "cs") return CovarianceModel::compound_symmetry(d, rho);
  }
  throw InputError("unknown covariance '" + std::string(text) + "' (expected identity, ar:<rho> or cs:<rho>)");
}

nlohmann::json report_json(const TestResult& r, const Design& design, const std::vector<std::string>& labels,
                           const HypothesisSpec& hypothesis) {
  using nlohmann::json;
  const auto& t = r.traces;
  json traces = {
      {"a1", r.traces.a1},
      {"a2", r.traces.a2},
      {"c1", r.traces.c1},
      {"c1_mode", t.c1_mode == C1Mode::kExact ? "exact" : "subsampled"},
      {"groups_used", {{"a1", t.a1_groups}, {"a2", t.a2_groups}, {"c1", t.c1_groups}}},
      {"subsample_draws", t.draws},
  };
  const bool normal_limit = std::isinf(r.f_hat);
  return json{
      {"version", kVersion},
      {"design", {{"groups", design.groups()}, {"labels", labels}, {"sizes", design.sizes()}, {"dim", design.dim()},
                  {"total", design.total()}}},
      {"hypothesis", to_string(hypothesis.kind)},
      {"traces", traces},
      {"q", r.q},
      {"w", r.w},
      {"eta", r.eta},
      {"f_hat", normal_limit ? json(nullptr) : json(r.f_hat)},
      {"normal_limit", normal_limit},
      {"critical_values", {{"psi_z", r.critical.z}, {"psi_chi", r.critical.chi1}, {"phi_kf", r.critical.kf}}},
      {"p_value", r.p_value},
      {"p_value_method", "upper tail of K_f_hat at W_N"},
      {"decisions", {{"psi_z", r.decisions.z}, {"psi_chi", r.decisions.chi1}, {"phi_kf", r.decisions.kf}}},
      {"alpha", r.alpha},
      {"upsilon", r.upsilon},
      {"seed", r.seed},
  };
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("simulation config must be a JSON object");
  try {
    SimConfig c;
    if (!j.contains("d")) throw InputError("simulation config needs 'd'");
    c.dim = static_cast<std::size_t>(json_number(j.at("d")));
    if (j.contains("sizes")) {
      for (const auto& v : j.at("sizes")) c.sizes.push_back(static_cast<std::size_t>(json_number(v)));
    } else if (j.contains("a")) {
      c.sizes = paper_sizes(static_cast<std::size_t>(json_number(j.at("a"))));
    } else {
      throw InputError("simulation config needs 'sizes' or 'a'");
    }
    c.covariance = parse_covariance(j.value("covariance", std::string("ar:0.6")), c.dim);
    c.hypothesis.kind = parse_hypothesis_kind(j.value("hypothesis", std::string("interaction")));
    c.alternative = parse_alternative(j.value("alternative", std::string("null")));
    if (j.contains("deltas")) {
      c.deltas.clear();
      for (const auto& v : j.at("deltas")) c.deltas.push_back(json_number(v));
    }
    if (j.contains("alpha")) c.alpha = json_number(j.at("alpha"));
    if (j.contains("replications")) c.replications = static_cast<std::size_t>(json_number(j.at("replications")));
    if (j.contains("upsilon")) c.upsilon = json_number(j.at("upsilon"));
    if (j.contains("seed")) c.seed = j.at("seed").is_number_unsigned() ? j.at("seed").get<std::uint64_t>()
                                                                        : static_cast<std::uint64_t>(json_number(j.at("seed")));
    if (j.contains("threads")) c.threads = static_cast<unsigned>(json_number(j.at("threads")));
    if (c.alternative == Alternative::kNull) c.deltas = {0.0};
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed simulation config: ") + e.what());
  }
}

nlohmann::json sim_config_to_json(const SimConfig& c) {
  return {
      {"sizes", c.sizes},
      {"d", c.dim},
      {"covariance", c.covariance.describe()},
      {"hypothesis", to_string(c.hypothesis.kind)},
      {"alternative", to_string(c.alternative)},
      {"deltas", c.deltas},
      {"alpha", c.alpha},
      {"replications", c.replications},
      {"upsilon", c.upsilon},
      {"seed", c.seed},
  };
}

std::string sim_csv_header(bool with_group_count) {
  return with_group_count ? "a,delta,test,rate,se,reps\n" : "delta,test,rate,se,reps\n";
}

std::string sim_csv_rows(const SimResult& result, bool with_group_count) {
  std::string out;
  for (const auto& row : result.rows) {
    if (with_group_count) out += std::to_string(result.config.sizes.size()) + ',';
    out += format_double(row.delta) + ',' + std::string(to_string(row.test)) + ',' + format_double(row.rate) + ',' +
           format_double(row.se) + ',' + std::to_string(row.replications) + '\n';
  }
  return out;
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw InputError("plot series '" + s.name + "' has mismatched coordinates");
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.05, y1 += 0.05;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
     << "</text>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fixed(xv, 2)
       << "</text>\n"
       << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << fixed(yv, 3)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
     << escape_xml(x_label) << "</text>\n"
     << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << kTop + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k)
      os << (k ? " " : "") << fixed(px(series[s].x[k]), 2) << ',' << fixed(py(series[s].y[k]), 2);
    os << "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(s);
    os << "<line x1=\"" << kLeft + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 40 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
       << "<text x=\"" << kLeft + pw + 46 << "\" y=\"" << ly + 4 << "\">" << escape_xml(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<FpCell> fp_table(const std::vector<std::size_t>& dims, const std::vector<std::size_t>& group_counts,
                             std::string_view covariance, HypothesisKind hypothesis,
                             const std::vector<std::size_t>& sizes) {
  std::vector<FpCell> cells;
  for (auto d : dims) {
    const Matrix sigma = parse_covariance(covariance, d).materialize();
    for (auto a : group_counts) {
      std::vector<std::size_t> n;
      if (sizes.empty()) {
        n = paper_sizes(a);
      } else {
        if (sizes.size() < a) throw InputError("size vector has fewer than a = " + std::to_string(a) + " entries");
        n.assign(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(a));
      }
      const auto proj = canonical_hypothesis(hypothesis, a, d);
      const auto dof = f_p_exact(proj.whole(), proj.sub(), sigma, n);
      cells.push_back({d, a, dof.f, dof.tau});
    }
  }
  return cells;
}

std::string fp_table_csv(const std::vector<FpCell>& cells) {
  std::string out = "d,a,f_p,tau_p\n";
  for (const auto& c : cells)
    out += std::to_string(c.d) + ',' + std::to_string(c.a) + ',' + fixed(c.f, 8) + ',' + fixed(c.tau, 8) + '\n';
  return out;
}

}  // namespace splitplot
