#include "mgcool/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mgcool/errors.hpp"
#include "mgcool/rates.hpp"

namespace mgcool::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double finite_value(const std::string& key, const std::string& text) {
  double v = 0.0;
  try {
    v = parse_double(text);
  } catch (const Error&) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
  if (!std::isfinite(v)) throw ConfigError("key '" + key + "' must be finite, got " + text);
  return v;
}

int int_value(const std::string& key, const std::string& text) {
  const double v = finite_value(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"picture", [](RunConfig& c, const std::string&, const std::string& v) { c.picture = model::parse_picture(v); }},
      {"order", [](RunConfig& c, const std::string&, const std::string& v) { c.params.order = model::parse_order(v); }},
      {"nu", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.nu = finite_value(k, v); }},
      {"omega", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.omega = finite_value(k, v); }},
      {"delta",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "resonance") {
           c.delta_at_resonance = true;
         } else {
           c.delta_at_resonance = false;
           c.params.delta = finite_value(k, v);
         }
       }},
      {"gamma", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.set_gamma(finite_value(k, v)); }},
      {"gamma_plus",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.params.gamma_plus = finite_value(k, v); }},
      {"gamma_minus",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.params.gamma_minus = finite_value(k, v); }},
      {"eta", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.eta = finite_value(k, v); }},
      {"eta_eff", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.eta_eff = finite_value(k, v); }},
      {"phi", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.phi = finite_value(k, v); }},
      {"n_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.n_max = int_value(k, v); }},
      {"n_initial", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_initial = finite_value(k, v); }},
      {"initial",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "fock") c.initial = model::PhononState::fock;
         else if (v == "thermal") c.initial = model::PhononState::thermal;
         else throw ConfigError("key '" + k + "' must be fock or thermal");
       }},
      {"ions", [](RunConfig& c, const std::string& k, const std::string& v) { c.ions = int_value(k, v); }},
      {"mode_truncation",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         c.mode_truncation.clear();
         for (const auto& part : split(v, ',')) c.mode_truncation.push_back(int_value(k, part));
       }},
      {"method",
       [](RunConfig& c, const std::string&, const std::string& v) { c.integrator.method = dynamics::parse_method(v); }},
      {"t_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.t_end = finite_value(k, v); }},
      {"sample_every",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.sample_every = finite_value(k, v); }},
      {"rel_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.rel_tol = finite_value(k, v); }},
      {"abs_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.abs_tol = finite_value(k, v); }},
      {"tail_tol",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.tail_tol = finite_value(k, v); }},
      {"fixed_step",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.integrator.fixed_step = finite_value(k, v); }},
      {"rotating_frame",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "true" || v == "1") c.integrator.rotating_frame = true;
         else if (v == "false" || v == "0") c.integrator.rotating_frame = false;
         else throw ConfigError("key '" + k + "' must be true or false");
       }},
  };
  return table;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("cannot parse '" + std::string(text) + "' as a number");
  }
  return v;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t RunConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries) canon += k + "=" + v + "\n";
  return fnv1a(canon);
}

std::vector<std::string> RunConfig::provenance() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) out.push_back(k + "=" + v);
  if (delta_at_resonance) out.push_back("delta_resolved=" + format_double(params.delta));
  std::ostringstream h;
  h << "config_hash=" << std::hex << std::setw(16) << std::setfill('0') << hash();
  out.push_back(h.str());
  out.push_back("units=frequencies in nu, time in 1/nu");
  return out;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  cfg.params.order = model::ExpansionOrder::second;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (cfg.entries.count(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second(cfg, key, value);
    cfg.entries[key] = value;
  }
  if (cfg.delta_at_resonance) cfg.params.delta = rates::resonance_detuning(cfg.params.omega, cfg.params.nu);
  cfg.params.validate();
  cfg.integrator.validate();
  if (cfg.ions < 1) throw ConfigError("ions must be at least 1");
  if (!(cfg.n_initial >= 0.0)) throw ConfigError("n_initial must be non-negative");
  if (!cfg.mode_truncation.empty() && static_cast<int>(cfg.mode_truncation.size()) != cfg.ions) {
    throw ConfigError("mode_truncation needs one entry per ion");
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw DimensionError("row has " + std::to_string(row.size()) + " cells, table has " +
                         std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column_index(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("no column named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void CsvTable::write(std::ostream& out) const {
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "," : "") << columns[k];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << format_double(r[k]);
    out << '\n';
  }
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  write(out);
}

CsvTable CsvTable::read(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view c(line);
      c.remove_prefix(1);
      if (!c.empty() && c.front() == ' ') c.remove_prefix(1);
      table.comments.emplace_back(c);
      continue;
    }
    const auto cells = split(line, ',');
    if (!have_header) {
      table.columns = cells;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) row.push_back(parse_double(cell));
    table.add_row(std::move(row));
  }
  if (!have_header) throw ConfigError("CSV has no header row");
  return table;
}

CsvTable CsvTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return read(in);
}

void write_svg(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double left = 70, right = 20, top = 40, bottom = 50;
  const double w = spec.width - left - right;
  const double h = spec.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (spec.log_y && !(s.y[k] > 0.0))) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y0) / (y1 - y0)) * h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\">" << spec.title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double label_y = spec.log_y ? std::pow(10.0, fy) : fy;
    out << "<text x=\"" << left + w * k / 4.0 << "\" y=\"" << top + h + 16 << "\" text-anchor=\"middle\">"
        << std::setprecision(3) << fx << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << top + h - h * k / 4.0 + 4 << "\" text-anchor=\"end\">"
        << std::setprecision(3) << label_y << "</text>\n";
  }
  out << "<text x=\"" << left + w / 2 << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
      << spec.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + h / 2 << ")\">" << spec.y_label << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* colour = palette[i % std::size(palette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k]) || (spec.log_y && !(s.y[k] > 0.0))) continue;
      out << px(s.x[k]) << ',' << py(s.y[k]) << ' ';
    }
    out << "\"/>\n";
    out << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 14 * i << "\" fill=\"" << colour << "\">" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
}

void save_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_svg(out, spec, series);
}

}  // namespace mgcool::io
