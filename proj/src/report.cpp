#include "dynedge/report.hpp"

#include "dynedge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dynedge {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string simulation_csv(const SimResult& r) {
  std::ostringstream os;
  os << "t";
  const std::vector<std::pair<const char*, const std::vector<Matrix>*>> groups{
      {"y", &r.y}, {"v", &r.v}, {"ref", &r.refs}, {"err", &r.errors}};
  for (std::size_t i = 0; i < r.y.size(); ++i)
    for (const auto& [name, g] : groups)
      for (Eigen::Index k = 0; k < (*g)[i].rows(); ++k) os << "," << name << i + 1 << "_" << k + 1;
  os << "\n";
  for (std::size_t c = 0; c < r.t.size(); ++c) {
    os << num(r.t[c]);
    for (std::size_t i = 0; i < r.y.size(); ++i)
      for (const auto& [name, g] : groups)
        for (Eigen::Index k = 0; k < (*g)[i].rows(); ++k) os << "," << num((*g)[i](k, static_cast<Eigen::Index>(c)));
    os << "\n";
  }
  return os.str();
}

std::string svg_panel(const std::string& title, const std::vector<double>& t, const std::vector<Matrix>& series,
                      const std::vector<Matrix>& dashed) {
  const double W = 800, H = 300, ml = 70, mr = 20, mt = 30, mb = 40;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  auto scan = [&](const std::vector<Matrix>& s) {
    for (const auto& m : s)
      if (m.size()) {
        lo = any ? std::min(lo, m.minCoeff()) : m.minCoeff();
        hi = any ? std::max(hi, m.maxCoeff()) : m.maxCoeff();
        any = true;
      }
  };
  scan(series);
  scan(dashed);
  if (hi - lo < 1e-300) {
    hi += 1.0;
    lo -= 1.0;
  }
  const double t0 = t.empty() ? 0.0 : t.front(), t1 = t.empty() ? 1.0 : std::max(t.back(), t0 + 1e-300);
  auto X = [&](double v) { return ml + (v - t0) / (t1 - t0) * (W - ml - mr); };
  auto Y = [&](double v) { return mt + (hi - v) / (hi - lo) * (H - mt - mb); };
  const std::size_t stride = std::max<std::size_t>(1, t.size() / 2000);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    os << "<text x=\"" << ml - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << short_num(v) << "</text>\n";
    const double tv = t0 + (t1 - t0) * k / 4.0;
    os << "<text x=\"" << X(tv) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << short_num(tv) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 6 << "\" text-anchor=\"middle\">t [s]</text>\n";
  auto lines = [&](const std::vector<Matrix>& s, bool dash) {
    int colour = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (Eigen::Index r = 0; r < s[i].rows(); ++r, ++colour) {
        os << "<polyline fill=\"none\" stroke=\"" << kPalette[colour % 8] << "\" stroke-width=\"1\""
           << (dash ? " stroke-dasharray=\"4 3\"" : "") << " points=\"";
        for (std::size_t c = 0; c < t.size(); c += stride)
          os << short_num(X(t[c])) << "," << short_num(Y(s[i](r, static_cast<Eigen::Index>(c)))) << " ";
        os << "\"/>\n";
      }
  };
  lines(series, false);
  lines(dashed, true);
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> write_svg_panels(const SimResult& r, const std::string& dir, const std::string& stem) {
  const std::vector<std::pair<std::string, std::string>> files{
      {stem + "_outputs.svg", svg_panel("node outputs y_i", r.t, r.y)},
      {stem + "_inputs.svg", svg_panel("neighboring inputs v_i (dashed: references)", r.t, r.v, r.refs)},
      {stem + "_errors.svg", svg_panel("errors", r.t, r.errors)},
  };
  std::vector<std::string> out;
  for (const auto& [name, text] : files) {
    write_text((std::filesystem::path(dir) / name).string(), text);
    out.push_back(name);
  }
  return out;
}

bool MetricCheck::pass() const {
  if (!evaluated || !std::isfinite(measured)) return false;
  if (op == "<") return measured < limit;
  if (op == "<=") return measured <= limit;
  if (op == ">") return measured > limit;
  if (op == ">=") return measured >= limit;
  if (op == "==") return measured == limit;
  return false;
}

std::vector<MetricCheck> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MetricCheck> out;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || (n == 1 && line.rfind("name,", 0) == 0)) continue;
    std::istringstream ls(line);
    MetricCheck c;
    std::string limit;
    if (!std::getline(ls, c.name, ',') || !std::getline(ls, c.op, ',') || !std::getline(ls, limit, ','))
      fail(ErrorCode::ParseError, "line " + std::to_string(n) + ": expected name,op,limit");
    if (c.op != "<" && c.op != "<=" && c.op != ">" && c.op != ">=" && c.op != "==")
      fail(ErrorCode::ParseError, "line " + std::to_string(n) + ": unknown comparison '" + c.op + "'");
    char* end = nullptr;
    c.limit = std::strtod(limit.c_str(), &end);
    if (end == limit.c_str()) fail(ErrorCode::ParseError, "line " + std::to_string(n) + ": bad limit '" + limit + "'");
    out.push_back(c);
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricCheck>& checks, bool with_results) {
  std::ostringstream os;
  os << (with_results ? "name,op,limit,measured,pass\n" : "name,op,limit\n");
  for (const auto& c : checks) {
    os << c.name << "," << c.op << "," << num(c.limit);
    if (with_results) os << "," << num(c.measured) << "," << (c.pass() ? "true" : "false");
    os << "\n";
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::ValidationError, "cannot write '" + path + "'");
  f << text;
}

}  // namespace dynedge
