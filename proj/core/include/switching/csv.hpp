#ifndef SWITCHING_CSV_HPP_
#define SWITCHING_CSV_HPP_

#include "switching/coupling.hpp"
#include "switching/sim.hpp"
#include "switching/transport.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace switching {

// Shortest representation that round-trips.
std::string format_double(double v);

// t,i,x_1..x_d per grid sample; a leading `path` column when path >= 0.
void write_trajectory_header(std::ostream& out, int dim, bool with_path);
void write_trajectory_rows(std::ostream& out, const Trajectory& path, int path_index = -1);

// t,i,j,l,x_1..x_d,y_1..y_d,d with d the metric distance between x and y.
void write_coupled_csv(std::ostream& out, const SwitchingSpec& spec, const CoupledRun& run);

// t,mean,stderr
void write_curve_csv(std::ostream& out, const std::vector<double>& times,
                     const std::vector<double>& means, const std::vector<double>& stderrs);

// Reads a header row and uses the `i`, `x_k` and optional `weight` columns;
// other columns (t, path, ...) are ignored. Missing weights mean uniform.
EmpiricalMeasure read_measure_csv(std::istream& in);
EmpiricalMeasure load_measure_csv(const std::string& path);

// k,l,mass for every nonzero entry.
void write_plan_csv(std::ostream& out, const Matrix& plan);

}  // namespace switching

#endif  // SWITCHING_CSV_HPP_
