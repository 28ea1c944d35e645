#include "sscb/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "sscb/error.hpp"
#include "sscb/policy.hpp"

namespace sscb {

namespace {

void require_rounds(std::span<const RoundRecord> log, std::size_t rounds) {
  if (rounds == 0) throw ValidationError("metric horizon T must be positive");
  if (log.size() < rounds)
    throw ValidationError("log holds " + std::to_string(log.size()) + " rounds, need " +
                          std::to_string(rounds));
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <class T>
T parse_field(const std::string& text, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("bad log field '" + text + "'", line);
  return value;
}

std::size_t reference_greedy(const RewardModel& model, const ParamVector& ref,
                             std::span<const double> d) {
  return assign_cluster(model.predict(ref, d));
}

}  // namespace

void RunLog::append(const RoundRecord& record) {
  const std::uint64_t expected = rounds_.empty() ? record.round : rounds_.back().round + 1;
  if (record.round != expected || record.round == 0)
    throw ContractViolation("run log rounds must be gap-free and increasing; expected " +
                            std::to_string(expected) + ", got " + std::to_string(record.round));
  rounds_.push_back(record);
}

void write_round_header(std::ostream& out) {
  out << "round\tstage\tcontext\taction\tpropensity\treward\tgreedy\n";
}

void write_round(std::ostream& out, const RoundRecord& r) {
  out << r.round << '\t' << r.stage << '\t' << r.context_id << '\t' << r.action << '\t'
      << format_double(r.propensity) << '\t' << format_double(r.reward) << '\t' << r.greedy_action
      << '\n';
}

void write_log_tsv(const std::filesystem::path& path, const RunLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write log '" + path.string() + "'");
  write_round_header(out);
  for (const auto& r : log.rounds()) write_round(out, r);
}

std::vector<RoundRecord> read_log_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open log '" + path.string() + "'", 0);
  std::string line;
  std::getline(in, line);
  std::vector<RoundRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, '\t')) cells.push_back(cell);
    if (cells.size() != 7) throw ParseError("log row needs 7 fields", line_no);
    RoundRecord r;
    r.round = parse_field<std::uint64_t>(cells[0], line_no);
    r.stage = parse_field<std::uint64_t>(cells[1], line_no);
    r.context_id = parse_field<std::uint32_t>(cells[2], line_no);
    r.action = parse_field<std::uint32_t>(cells[3], line_no);
    r.propensity = parse_field<double>(cells[4], line_no);
    r.reward = parse_field<double>(cells[5], line_no);
    r.greedy_action = parse_field<std::uint32_t>(cells[6], line_no);
    rows.push_back(r);
  }
  return rows;
}

double average_cumulative_regret(std::span<const RoundRecord> log, std::size_t rounds) {
  require_rounds(log, rounds);
  double sum = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) sum += log[t].reward;
  return 1.0 - sum / static_cast<double>(rounds);
}

double progressive_validation_loss(std::span<const RoundRecord> log, std::size_t rounds) {
  require_rounds(log, rounds);
  double loss = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) loss += 1.0 - log[t].reward;
  return loss / static_cast<double>(rounds);
}

double expected_regret(std::span<const RoundRecord> log, const Environment& env) {
  if (!env.has_analytic_rewards())
    throw ValidationError("expected regret needs analytic reward means");
  double regret = 0.0;
  for (const auto& r : log) {
    const std::size_t best = *env.optimal_action(r.context_id);
    regret += *env.mean_reward(r.context_id, best) - r.reward;
  }
  return regret;
}

double mismatching_rate(std::span<const RoundRecord> log, const RewardModel& model,
                        const ParamVector& reference, const Environment& env) {
  if (log.empty()) throw ValidationError("mismatching rate of an empty log");
  std::uint64_t mismatches = 0;
  for (const auto& r : log) {
    if (r.context_id >= env.num_contexts())
      throw IndexError("unknown context id " + std::to_string(r.context_id));
    if (r.action != reference_greedy(model, reference, env.context(r.context_id))) ++mismatches;
  }
  return static_cast<double>(mismatches) / static_cast<double>(log.size());
}

double mismatching_rate(std::span<const RoundRecord> log, const RewardModel& model,
                        std::span<const ParamVector> references, const Environment& env) {
  if (references.empty()) throw ValidationError("empty reference set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ref : references) best = std::min(best, mismatching_rate(log, model, ref, env));
  return best;
}

double out_of_sample_mse(const RewardModel& model, const ParamVector& x, const LabeledSet& test) {
  if (test.size() == 0) throw ValidationError("empty test set");
  if (test.num_classes != model.num_actions())
    throw ShapeError("test set classes differ from model K");
  double total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto f = model.predict(x, test.features[i]);
    for (std::size_t a = 0; a < f.size(); ++a) {
      const double diff = f[a] - (test.labels[i] == a ? 1.0 : 0.0);
      total += diff * diff;
    }
  }
  return total / static_cast<double>(model.num_actions() * test.size());
}

double top1_accuracy(const RewardModel& model, const ParamVector& x, const LabeledSet& test) {
  if (test.size() == 0) throw ValidationError("empty test set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (assign_cluster(model.predict(x, test.features[i])) == test.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

MismatchTracker::MismatchTracker(const RewardModel& model, const Environment& env,
                                 std::span<const ParamVector> references)
    : mismatches_(references.size(), 0) {
  if (references.empty()) throw ValidationError("empty reference set");
  for (const auto& ref : references) {
    std::vector<std::uint32_t> greedy(env.num_contexts());
    for (std::size_t id = 0; id < env.num_contexts(); ++id)
      greedy[id] = static_cast<std::uint32_t>(reference_greedy(model, ref, env.context(id)));
    greedy_.push_back(std::move(greedy));
  }
}

void MismatchTracker::observe(const RoundRecord& record) {
  for (std::size_t k = 0; k < greedy_.size(); ++k)
    if (record.action != greedy_[k].at(record.context_id)) ++mismatches_[k];
  ++rounds_;
}

void MismatchTracker::reset() {
  std::fill(mismatches_.begin(), mismatches_.end(), 0);
  rounds_ = 0;
}

double MismatchTracker::rate() const {
  if (rounds_ == 0) return 0.0;
  const auto best = *std::min_element(mismatches_.begin(), mismatches_.end());
  return static_cast<double>(best) / static_cast<double>(rounds_);
}

}  // namespace sscb
