#pragma once

// Run configuration files, CSV tables and minimal SVG line charts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mgcool/dynamics.hpp"
#include "mgcool/model.hpp"

namespace mgcool::io {

/// Flat key=value configuration of a single-run simulation. Lines starting
/// with '#' and blank lines are ignored.
struct RunConfig {
  model::SystemParams params;
  model::Picture picture = model::Picture::original;
  bool delta_at_resonance = false;
  double n_initial = 2.0;
  model::PhononState initial = model::PhononState::fock;
  /// Number of ions; 1 selects the single-mode model.
  int ions = 1;
  std::vector<int> mode_truncation;
  dynamics::IntegratorConfig integrator;
  /// Canonical key=value pairs as given, used for provenance.
  std::map<std::string, std::string> entries;

  std::uint64_t hash() const;
  /// "# key=value" lines in key order.
  std::vector<std::string> provenance() const;
};

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

/// FNV-1a over the bytes of text.
std::uint64_t fnv1a(std::string_view text);

struct CsvTable {
  /// Written as "# " prefixed lines before the header.
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::vector<double> column(std::string_view name) const;
  std::size_t column_index(std::string_view name) const;
  std::size_t size() const { return rows.size(); }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static CsvTable read(std::istream& in);
  static CsvTable load(const std::filesystem::path& path);
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

void write_svg(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series);
void save_svg(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace mgcool::io
