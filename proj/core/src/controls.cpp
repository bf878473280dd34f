#include "qoc/controls.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qoc {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  // Host is little-endian on all supported platforms; assert cheaply once.
  static const bool little = [] {
    const uint16_t probe = 1;
    unsigned char b[2];
    std::memcpy(b, &probe, 2);
    return b[0] == 1;
  }();
  require(little, "binary control IO requires a little-endian host");
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  require(static_cast<bool>(is), "unexpected end of binary stream");
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

TimeGrid TimeGrid::over(double t0, double t1, int steps) {
  require(steps > 0, "TimeGrid: steps must be positive");
  require(t1 > t0, "TimeGrid: t_end must exceed t_start");
  return TimeGrid{t0, (t1 - t0) / steps, steps};
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
  return a.t_start == b.t_start && a.dt == b.dt && a.steps == b.steps;
}

ControlField::ControlField(TimeGrid grid, int channels)
    : grid_(grid), samples_(RMat::Zero(channels, grid.steps)) {
  require(channels > 0, "ControlField: channels must be positive");
}

ControlField::ControlField(TimeGrid grid, RMat samples)
    : grid_(grid), samples_(std::move(samples)) {
  require(samples_.rows() > 0, "ControlField: channels must be positive");
  require(static_cast<int>(samples_.cols()) == grid_.steps,
          "ControlField: sample count does not match grid steps");
}

ControlField ControlField::zeros(TimeGrid grid, int channels) {
  return ControlField(grid, channels);
}

ControlField ControlField::constant(TimeGrid grid, int channels, double value) {
  ControlField u(grid, channels);
  u.samples().setConstant(value);
  return u;
}

PenaltySchedule PenaltySchedule::constant(double alpha, int steps) {
  require(alpha >= 0.0, "PenaltySchedule: alpha must be nonnegative");
  require(steps > 0, "PenaltySchedule: steps must be positive");
  return PenaltySchedule{std::vector<double>(static_cast<size_t>(steps), alpha)};
}

PenaltySchedule PenaltySchedule::from_function(
    const TimeGrid& grid, const std::function<double(double)>& alpha_of_t) {
  PenaltySchedule p;
  p.values.reserve(static_cast<size_t>(grid.steps));
  for (int j = 0; j < grid.steps; ++j) {
    const double a = alpha_of_t(grid.node(j));
    require(a >= 0.0, "PenaltySchedule: alpha(t) must be nonnegative");
    p.values.push_back(a);
  }
  return p;
}

PenaltySchedule PenaltySchedule::slice(int begin, int end) const {
  require(0 <= begin && begin <= end && end <= steps(), "PenaltySchedule: bad slice range");
  return PenaltySchedule{std::vector<double>(values.begin() + begin, values.begin() + end)};
}

Decomposition Decomposition::uniform(int steps, int parts) {
  require(parts > 0, "Decomposition: parts must be positive");
  require(steps > 0, "Decomposition: steps must be positive");
  require(steps % parts == 0,
          "Decomposition: step count " + std::to_string(steps) +
              " is not divisible into " + std::to_string(parts) + " equal parts");
  Decomposition d;
  const int len = steps / parts;
  for (int n = 0; n <= parts; ++n) d.node_index.push_back(n * len);
  return d;
}

Decomposition Decomposition::from_times(const TimeGrid& grid, const std::vector<double>& times) {
  require(times.size() >= 2, "Decomposition: need at least start and end times");
  Decomposition d;
  int prev = -1;
  for (double t : times) {
    const double raw = (t - grid.t_start) / grid.dt;
    const int j = static_cast<int>(std::llround(raw));
    require(j >= 0 && j <= grid.steps,
            "Decomposition: boundary time " + format_g17(t) + " outside grid");
    require(std::abs(raw - j) <= 1e-9,
            "Decomposition: boundary time " + format_g17(t) + " is not a grid node");
    require(j > prev, "Decomposition: boundary times must strictly increase");
    d.node_index.push_back(j);
    prev = j;
  }
  require(d.node_index.front() == 0 && d.node_index.back() == grid.steps,
          "Decomposition: boundaries must span the full grid");
  return d;
}

ControlField restrict_field(const ControlField& u, const Decomposition& d, int part) {
  require(part >= 0 && part < d.parts(), "restrict_field: part index out of range");
  const int b = d.begin(part);
  const int len = d.length(part);
  TimeGrid sub{u.grid().node(b), u.grid().dt, len};
  return ControlField(sub, u.samples().middleCols(b, len));
}

ControlField concat(const std::vector<ControlField>& parts) {
  require(!parts.empty(), "concat: no control fields given");
  const int channels = parts.front().channels();
  const double dt = parts.front().grid().dt;
  int total = 0;
  for (size_t n = 0; n < parts.size(); ++n) {
    require(parts[n].channels() == channels, "concat: channel count mismatch");
    require(parts[n].grid().dt == dt, "concat: step size mismatch");
    if (n > 0) {
      const double gap = parts[n].grid().t_start - parts[n - 1].grid().t_end();
      require(std::abs(gap) <= dt * 1e-9, "concat: subinterval grids do not abut");
    }
    total += parts[n].steps();
  }
  TimeGrid grid{parts.front().grid().t_start, dt, total};
  RMat samples(channels, total);
  int col = 0;
  for (const auto& p : parts) {
    samples.middleCols(col, p.steps()) = p.samples();
    col += p.steps();
  }
  return ControlField(grid, std::move(samples));
}

double weighted_l2_penalty(const ControlField& u, const PenaltySchedule& alpha) {
  require(alpha.steps() == u.steps(), "weighted_l2_penalty: schedule/grid length mismatch");
  double acc = 0.0;
  for (int j = 0; j < u.steps(); ++j) {
    acc += alpha[j] * u.samples().col(j).squaredNorm();
  }
  return 0.5 * u.grid().dt * acc;
}

void write_control_csv(std::ostream& os, const ControlField& u) {
  os << "t";
  for (int c = 1; c <= u.channels(); ++c) os << ",u_" << c;
  os << "\n";
  for (int j = 0; j < u.steps(); ++j) {
    os << format_g17(u.grid().node(j) + 0.5 * u.grid().dt);
    for (int c = 0; c < u.channels(); ++c) os << "," << format_g17(u(c, j));
    os << "\n";
  }
}

void write_control_csv(const std::string& path, const ControlField& u) {
  std::ofstream os(path);
  require(static_cast<bool>(os), "cannot open " + path + " for writing");
  write_control_csv(os, u);
  require(static_cast<bool>(os), "error while writing " + path);
}

ControlField read_control_csv(std::istream& is, const TimeGrid& grid) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), "control CSV: missing header");
  require(line.rfind("t,", 0) == 0, "control CSV: header must start with 't,'");
  const int channels = static_cast<int>(std::count(line.begin(), line.end(), ','));
  require(channels > 0, "control CSV: no control columns in header");
  ControlField u(grid, channels);
  for (int j = 0; j < grid.steps; ++j) {
    require(static_cast<bool>(std::getline(is, line)),
            "control CSV: expected " + std::to_string(grid.steps) + " rows");
    std::istringstream row(line);
    std::string cell;
    require(static_cast<bool>(std::getline(row, cell, ',')), "control CSV: empty row");
    for (int c = 0; c < channels; ++c) {
      require(static_cast<bool>(std::getline(row, cell, ',')),
              "control CSV: row " + std::to_string(j) + " has too few columns");
      u.at(c, j) = std::stod(cell);
    }
  }
  return u;
}

ControlField read_control_csv(const std::string& path, const TimeGrid& grid) {
  std::ifstream is(path);
  require(static_cast<bool>(is), "cannot open " + path);
  return read_control_csv(is, grid);
}

void write_control_binary(std::ostream& os, const ControlField& u) {
  write_le<uint32_t>(os, static_cast<uint32_t>(u.channels()));
  write_le<uint64_t>(os, static_cast<uint64_t>(u.steps()));
  write_le<double>(os, u.grid().t_start);
  write_le<double>(os, u.grid().dt);
  for (int c = 0; c < u.channels(); ++c)
    for (int j = 0; j < u.steps(); ++j) write_le<double>(os, u(c, j));
}

ControlField read_control_binary(std::istream& is) {
  const auto channels = static_cast<int>(read_le<uint32_t>(is));
  const auto steps = static_cast<int>(read_le<uint64_t>(is));
  TimeGrid grid{read_le<double>(is), read_le<double>(is), steps};
  ControlField u(grid, channels);
  for (int c = 0; c < channels; ++c)
    for (int j = 0; j < steps; ++j) u.at(c, j) = read_le<double>(is);
  return u;
}

void write_matrix_binary(std::ostream& os, const CMat& m) {
  write_le<uint64_t>(os, static_cast<uint64_t>(m.rows()));
  write_le<uint64_t>(os, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      write_le<double>(os, m(r, c).real());
      write_le<double>(os, m(r, c).imag());
    }
}

CMat read_matrix_binary(std::istream& is) {
  const auto rows = static_cast<Eigen::Index>(read_le<uint64_t>(is));
  const auto cols = static_cast<Eigen::Index>(read_le<uint64_t>(is));
  CMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = read_le<double>(is);
      const double im = read_le<double>(is);
      m(r, c) = Complex(re, im);
    }
  return m;
}

void write_vector_binary(std::ostream& os, const CVec& v) {
  write_le<uint64_t>(os, static_cast<uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    write_le<double>(os, v[i].real());
    write_le<double>(os, v[i].imag());
  }
}

CVec read_vector_binary(std::istream& is) {
  const auto n = static_cast<Eigen::Index>(read_le<uint64_t>(is));
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = read_le<double>(is);
    const double im = read_le<double>(is);
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace qoc
