#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qoc/linalg.hpp"

namespace qoc {

// Uniform step grid. t_end() is derived so that restrictions share the parent
// step size bitwise; node(steps) may differ from t_start + span by one ulp.
struct TimeGrid {
  double t_start = 0.0;
  double dt = 0.0;
  int steps = 0;

  static TimeGrid over(double t0, double t1, int steps);

  double node(int j) const { return t_start + dt * j; }
  double t_end() const { return node(steps); }
  double span() const { return dt * steps; }
};

bool same_grid(const TimeGrid& a, const TimeGrid& b);

// Piecewise-constant control samples, one value per channel per step.
// samples_(c, j) holds channel c on [t_j, t_{j+1}).
class ControlField {
 public:
  ControlField() = default;
  ControlField(TimeGrid grid, int channels);
  ControlField(TimeGrid grid, RMat samples);

  static ControlField zeros(TimeGrid grid, int channels);
  static ControlField constant(TimeGrid grid, int channels, double value);

  const TimeGrid& grid() const { return grid_; }
  int channels() const { return static_cast<int>(samples_.rows()); }
  int steps() const { return grid_.steps; }

  double operator()(int channel, int step) const { return samples_(channel, step); }
  double& at(int channel, int step) { return samples_(channel, step); }
  RVec step_values(int step) const { return samples_.col(step); }

  const RMat& samples() const { return samples_; }
  RMat& samples() { return samples_; }

  bool all_finite() const { return samples_.allFinite(); }

 private:
  TimeGrid grid_;
  RMat samples_;  // channels x steps
};

// Per-step penalty weights alpha(t_j) >= 0, one per step.
struct PenaltySchedule {
  std::vector<double> values;

  static PenaltySchedule constant(double alpha, int steps);
  static PenaltySchedule from_function(const TimeGrid& grid,
                                       const std::function<double(double)>& alpha_of_t);

  int steps() const { return static_cast<int>(values.size()); }
  double operator[](int j) const { return values[static_cast<size_t>(j)]; }
  PenaltySchedule slice(int begin, int end) const;
};

// Subinterval boundaries as fine-grid node indices 0 = j_0 < ... < j_N = steps.
struct Decomposition {
  std::vector<int> node_index;

  static Decomposition uniform(int steps, int parts);
  // Boundary times snapped to grid nodes; rejects times farther than dt*1e-9.
  static Decomposition from_times(const TimeGrid& grid, const std::vector<double>& times);

  int parts() const { return static_cast<int>(node_index.size()) - 1; }
  int begin(int n) const { return node_index[static_cast<size_t>(n)]; }
  int end(int n) const { return node_index[static_cast<size_t>(n) + 1]; }
  int length(int n) const { return end(n) - begin(n); }
};

ControlField restrict_field(const ControlField& u, const Decomposition& d, int part);
ControlField concat(const std::vector<ControlField>& parts);

// (1/2) sum_j alpha_j dt sum_c u(c,j)^2
double weighted_l2_penalty(const ControlField& u, const PenaltySchedule& alpha);

// CSV: header "t,u_1,...,u_C", one row per step at the interval midpoint.
void write_control_csv(std::ostream& os, const ControlField& u);
void write_control_csv(const std::string& path, const ControlField& u);
ControlField read_control_csv(std::istream& is, const TimeGrid& grid);
ControlField read_control_csv(const std::string& path, const TimeGrid& grid);

// Binary: little-endian, dimension header (u32 channels, u64 steps,
// f64 t_start, f64 dt) followed by channel-major f64 samples.
void write_control_binary(std::ostream& os, const ControlField& u);
ControlField read_control_binary(std::istream& is);

void write_matrix_binary(std::ostream& os, const CMat& m);
CMat read_matrix_binary(std::istream& is);
void write_vector_binary(std::ostream& os, const CVec& v);
CVec read_vector_binary(std::istream& is);

}  // namespace qoc
