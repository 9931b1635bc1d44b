#include "switching/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace switching {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_trajectory_header(std::ostream& out, int dim, bool with_path) {
  if (with_path) out << "path,";
  out << "t,i";
  for (int k = 1; k <= dim; ++k) out << ",x_" << k;
  out << '\n';
}

void write_trajectory_rows(std::ostream& out, const Trajectory& path, int path_index) {
  for (std::size_t g = 0; g < path.grid_times.size(); ++g) {
    if (path_index >= 0) out << path_index << ',';
    out << format_double(path.grid_times[g]) << ',' << path.grid_regimes[g];
    const Vector& x = path.grid_states[g];
    for (Eigen::Index k = 0; k < x.size(); ++k) out << ',' << format_double(x(k));
    out << '\n';
  }
}

void write_coupled_csv(std::ostream& out, const SwitchingSpec& spec, const CoupledRun& run) {
  const int d = spec.dim;
  out << "t,i,j,l";
  for (int k = 1; k <= d; ++k) out << ",x_" << k;
  for (int k = 1; k <= d; ++k) out << ",y_" << k;
  out << ",d\n";
  const QuadraticMetric metric = spec.metric_object();
  for (const auto& s : run.grid) {
    out << format_double(s.t) << ',' << s.i << ',' << s.j << ',' << s.l;
    for (Eigen::Index k = 0; k < s.x.size(); ++k) out << ',' << format_double(s.x(k));
    for (int k = 0; k < d; ++k) {
      out << ',' << (s.y.size() == d ? format_double(s.y(k)) : std::string());
    }
    const double dist = s.y.size() == d ? metric.distance(s.x, s.y) : 0.0;
    out << ',' << format_double(dist) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<double>& times,
                     const std::vector<double>& means, const std::vector<double>& stderrs) {
  out << "t,mean,stderr\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << format_double(times[k]) << ',' << format_double(means[k]) << ','
        << format_double(stderrs[k]) << '\n';
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t row) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("csv row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

EmpiricalMeasure read_measure_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  const auto header = split(line);
  int col_i = -1, col_w = -1;
  std::vector<int> col_x;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "i") {
      col_i = static_cast<int>(c);
    } else if (h == "weight") {
      col_w = static_cast<int>(c);
    } else if (h.rfind("x_", 0) == 0) {
      const int k = std::stoi(h.substr(2));
      if (k < 1) throw std::invalid_argument("csv: bad column " + h);
      if (static_cast<int>(col_x.size()) < k) col_x.resize(k, -1);
      col_x[k - 1] = static_cast<int>(c);
    }
  }
  if (col_x.empty()) throw std::invalid_argument("csv: no x_k columns");
  for (std::size_t k = 0; k < col_x.size(); ++k) {
    if (col_x[k] < 0) throw std::invalid_argument("csv: missing column x_" + std::to_string(k + 1));
  }

  EmpiricalMeasure m;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument("csv row " + std::to_string(row) + ": wrong number of cells");
    }
    Vector x(static_cast<Eigen::Index>(col_x.size()));
    for (std::size_t k = 0; k < col_x.size(); ++k) x(k) = parse_number(cells[col_x[k]], row);
    m.points.push_back(std::move(x));
    m.regimes.push_back(col_i >= 0 ? static_cast<int>(parse_number(cells[col_i], row)) : 0);
    if (col_w >= 0) m.weights.push_back(parse_number(cells[col_w], row));
  }
  if (m.points.empty()) throw std::invalid_argument("csv: no samples");
  if (col_w < 0) m.weights.assign(m.points.size(), 1.0 / static_cast<double>(m.points.size()));
  m.validate();
  return m;
}

EmpiricalMeasure load_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_measure_csv(in);
}

void write_plan_csv(std::ostream& out, const Matrix& plan) {
  out << "k,l,mass\n";
  for (Eigen::Index k = 0; k < plan.rows(); ++k) {
    for (Eigen::Index l = 0; l < plan.cols(); ++l) {
      if (plan(k, l) != 0.0) out << k << ',' << l << ',' << format_double(plan(k, l)) << '\n';
    }
  }
}

}  // namespace switching
