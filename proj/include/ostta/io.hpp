#ifndef OSTTA_IO_HPP
#define OSTTA_IO_HPP

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ostta/engine.hpp"
#include "ostta/metrics.hpp"
#include "ostta/record.hpp"

namespace ostta {

// All emitted text is byte-deterministic for a given input: floats print
// with 9 significant digits via the C locale.

std::string format_g9(double v);

const char* decision_name(Decision d);
const char* reliability_name(Reliability r);
const char* loss_case_name(LossCase c);

// Columns follow the StepRecord fields in declaration order, with the loss
// breakdown expanded in place. Absent loss components print as empty fields.
std::string steps_csv(std::span<const StepRecord> records);

// Fixed key set {auroc, fpr95, acc_d, acc_u, hm, n_steps, method, seed,
// config_echo}; absent metrics serialize as null. config_echo preserves the
// given pair order.
std::string summary_json(const MetricSummary& summary, std::int64_t n_steps,
                         const std::string& method, std::uint64_t seed,
                         const std::vector<std::pair<std::string, std::string>>& config_echo);

// One row per (window, bin): window_start, bin_left, count_desired,
// count_undesired. All 100 bins of every window are emitted.
std::string hist_csv(const ScoreHistograms& h);

// Rows of (value, metrics) for a parameter sweep.
std::string sweep_csv(const std::vector<std::pair<double, MetricSummary>>& rows,
                      const std::vector<std::int64_t>& n_steps);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// key=value lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_flat_config(const std::string& text);

}  // namespace ostta

#endif  // OSTTA_IO_HPP
