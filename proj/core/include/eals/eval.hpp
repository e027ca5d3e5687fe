#pragma once

#include "eals/dataset.hpp"
#include "eals/model.hpp"
#include "eals/online.hpp"
#include "eals/weighting.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace eals {

/// 1 if `gt` is among the first `cutoff` entries, else 0.
int hit_ratio(const RankedList& ranked, ItemIndex gt, std::size_t cutoff);

/// 1 / log2(pos + 1) for a hit at 1-based position pos within `cutoff`,
/// else 0. Single relevant item, so the ideal DCG is 1.
double ndcg(const RankedList& ranked, ItemIndex gt, std::size_t cutoff);

struct EventResult {
    UserIndex user;
    ItemIndex item;
    std::int64_t timestamp;
    /// 1-based position within the cutoff, empty on a miss.
    std::optional<std::size_t> rank;
    int hr;
    double ndcg;
    /// |R_u| in the training data at scoring time.
    std::size_t history;

    friend bool operator==(const EventResult&, const EventResult&) = default;
};

struct EvalReport {
    std::size_t cutoff = 100;
    std::vector<EventResult> events;
    double hr = 0.0;
    double ndcg = 0.0;
    /// Test events whose user or item the model does not know.
    std::size_t skipped = 0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
    std::size_t cutoff = 100;
    bool exclude_train = false;
    int threads = 1;
};

/// Scores every held-out event against a fixed model; means are over all
/// scored events.
EvalReport evaluate_offline(const FactorModel& model, const SplitPair& split, const EvalOptions& options = {});
EvalReport evaluate_offline(const FactorModel& model, const InteractionDataset& train,
                            std::span<const TestEvent> test, const EvalOptions& options = {});

/**
 * Streams `test` in order: rows for unseen users/items are appended first,
 * the event is scored, then ingested.
 */
EvalReport evaluate_online(OnlineUpdater& updater, std::span<const TestEvent> test, const EvalOptions& options = {},
                           const IdMap* user_keys = nullptr, const IdMap* item_keys = nullptr);

EvalReport evaluate_online(const FactorModel& model, const InteractionDataset& train,
                           const ConfidenceWeights& weights, std::span<const TestEvent> test,
                           const OnlineConfig& config, const EvalOptions& options = {});

/// Means over consecutive windows of `window` events (last one may be short).
struct WindowMean {
    std::size_t begin;
    std::size_t end;
    double hr;
    double ndcg;
};
std::vector<WindowMean> windowed_means(const EvalReport& report, std::size_t window);

/// Aggregates by user history length; the last bucket collects all events
/// with history >= `max_history`.
struct HistoryBucket {
    std::size_t history;
    bool open_ended;
    std::size_t count;
    double hr;
    double ndcg;
};
std::vector<HistoryBucket> history_breakdown(const EvalReport& report, std::size_t max_history = 10);

/// One JSON object per event, then `{"type":"aggregate",...}`.
void write_report_jsonl(std::ostream& out, const EvalReport& report);
/// `history,count,hr,ndcg`; the open bucket is written as `N+`.
void write_breakdown_csv(std::ostream& out, const std::vector<HistoryBucket>& buckets);

}  // namespace eals
