#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wlan/domain.hpp"

namespace wlan {

struct DescriptiveConfig {
  LocalZone zone;
  /// An AP is overloaded when its peak concurrent clients exceed this.
  int overload_threshold = 50;
  /// A disassociation shorter than this counts as an unexpected disconnect.
  double unexpected_disconnect_minutes = 1.0;
};

/// Inclusive range of local calendar days.
struct DateRange {
  Date first;
  Date last;

  bool contains(Date d) const { return d >= first && d <= last; }
  int size() const { return last - first + 1; }
};

class InsufficientData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ZeroVariance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mergeable partial state of one day's aggregate. Adding records to two
/// accumulators and merging them finalizes to the same aggregate as adding
/// all records to one.
class DailyAccumulator {
 public:
  DailyAccumulator(Date day, const DescriptiveConfig& config);

  /// Records whose local day differs from `day()` are ignored.
  void add(const SessionRecord& record);
  void merge(const DailyAccumulator& other);
  DailyAggregate finalize() const;

  Date day() const { return day_; }

 private:
  struct Interval {
    std::int64_t start;
    std::int64_t end;
    ApId ap;
  };

  Date day_;
  DescriptiveConfig config_;
  std::int64_t connections_ = 0;
  std::int64_t auth_failures_ = 0;
  std::int64_t unexpected_disconnects_ = 0;
  std::int64_t disassoc_count_ = 0;
  double session_minutes_sum_ = 0.0;
  std::array<std::uint64_t, kProtocolCount> proto_bytes_{};
  std::vector<DeviceId> associated_devices_;
  std::map<ApId, std::vector<std::pair<std::int64_t, int>>> ap_events_;
  std::map<DeviceId, std::vector<Interval>> sessions_;
};

DailyAggregate aggregate_daily(std::span<const SessionRecord> records, Date day,
                               const DescriptiveConfig& config = {});

/// One aggregate per local day from the first to the last record day,
/// including days without records.
std::vector<DailyAggregate> aggregate_days(std::span<const SessionRecord> records,
                                           const DescriptiveConfig& config = {});

/// Local day span covered by `records`; nullopt when empty.
std::optional<DateRange> record_span(std::span<const SessionRecord> records, const LocalZone& zone);

/// Peak concurrency from a +1/-1 event sweep; departures sort before
/// arrivals at equal instants and the running count never drops below zero.
std::int64_t sweep_peak(std::vector<std::pair<std::int64_t, int>> events);

/// Per-AP statistics over `window` (all records when absent), sorted by
/// monthly connections descending, then AP id.
std::vector<ApStats> ap_load_stats(std::span<const SessionRecord> records,
                                   const std::optional<DateRange>& window = std::nullopt,
                                   const DescriptiveConfig& config = {});

/// Percentage of APs whose peak concurrency exceeds `threshold` (>= 1).
double overload_fraction(std::span<const ApStats> stats, int threshold);

/// Mean concurrent sessions at the top of every local hour, averaged over
/// the local days that have records. Sessions are reconstructed from
/// Disassoc records as [ts - session_minutes, ts).
HourlyProfile hourly_profile(std::span<const SessionRecord> records, const LocalZone& zone = {});

inline constexpr int kMinBaselineDays = 5;

/// Per-weekday mean and sample standard deviation of every metric. Slots
/// with fewer than `kMinBaselineDays` days carry the all-days statistics and
/// are flagged. Throws InsufficientData below `kMinBaselineDays` total days.
BaselineProfile build_baseline(std::span<const DailyAggregate> aggregates);

/// Pearson correlation. Throws std::invalid_argument when sizes differ or
/// are below 3, ZeroVariance when either series is constant.
double correlation(std::span<const double> xs, std::span<const double> ys);

/// Mean and sample (n-1) standard deviation of the rows of a column block.
template <typename Derived>
std::pair<Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>,
          Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1>>
column_mean_std(const Eigen::DenseBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  using Column = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const auto n = rows.rows();
  Column mean = rows.derived().array().colwise().mean().transpose();
  Column sd = Column::Zero(rows.cols());
  if (n > 1) {
    const auto centered = rows.derived().array().rowwise() - mean.transpose();
    sd = (centered.square().colwise().sum() / static_cast<Scalar>(n - 1)).sqrt().transpose();
  }
  return {mean, sd};
}

}  // namespace wlan
