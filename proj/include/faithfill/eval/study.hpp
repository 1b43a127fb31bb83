#pragma once

#include "faithfill/core/image.hpp"
#include "faithfill/core/rng.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace faithfill::eval {

enum class JudgeKind { human, gpt };

std::string_view judge_kind_name(JudgeKind kind);
JudgeKind parse_judge_kind(std::string_view name);

enum class Choice : char { a = 'a', b = 'b' };

/// One comparison: judges saw two generations against one target.
struct VoteRecord {
    std::string task_id;
    std::string target_id;
    std::string method_a;
    std::string method_b;
    std::vector<Choice> votes;
    JudgeKind judge_kind = JudgeKind::human;
    bool randomized_order = true;
};

/// Votes file: one record per line of whitespace-separated key=value fields
///   task=<id> target=<id> methods=<a>,<b> judge=human|gpt randomized=0|1 votes=<a|b...>
/// e.g. `task=t1 target=dog methods=ours,baseline judge=gpt randomized=1 votes=aabab`.
/// Blank lines and lines starting with '#' are ignored.
std::vector<VoteRecord> parse_votes(std::string_view text);
std::vector<VoteRecord> load_votes(const std::filesystem::path& path);
std::string format_vote(const VoteRecord& record);

struct PreferenceSummary {
    JudgeKind judge_kind = JudgeKind::human;
    std::string method_a;
    std::string method_b;
    std::size_t votes_a = 0;
    std::size_t votes_b = 0;
    double percent_a = 0.0;
    double percent_b = 0.0;
    std::size_t tasks = 0;
    std::size_t majority_a = 0;  // tasks won by method_a
    std::size_t majority_b = 0;
    std::size_t majority_ties = 0;
};

/// Per (judge kind, method pair) vote shares and per-task majority tallies.
/// A record listing the pair in the opposite order is folded in with its
/// votes swapped. Output is ordered by (judge kind, method_a, method_b).
std::vector<PreferenceSummary> aggregate_preferences(const std::vector<VoteRecord>& records);

/// Shares (a%, b%) when a is preferred `margin` percentage points more than b.
std::pair<double, double> margin_to_shares(double margin);

/// "a: 66.7%, b: 33.3%"-style one-decimal rendering.
std::string format_percent(double value);

std::string render_preferences(const std::vector<PreferenceSummary>& summaries);

/// External pairwise judge (e.g. a GPT endpoint): shown the target and two
/// candidates in presentation order, answers which one is closer.
struct JudgeResponse {
    Choice choice = Choice::a;
    std::string rationale;
};

class JudgeClient {
public:
    virtual ~JudgeClient() = default;
    virtual JudgeResponse judge(const ImageBuffer& target, const ImageBuffer& first, const ImageBuffer& second) = 0;
};

/// Replays fixed responses in order, for tests and offline runs.
class CannedJudge final : public JudgeClient {
public:
    explicit CannedJudge(std::vector<JudgeResponse> responses) : responses_(std::move(responses)) {}
    JudgeResponse judge(const ImageBuffer& target, const ImageBuffer& first, const ImageBuffer& second) override;

private:
    std::vector<JudgeResponse> responses_;
    std::size_t next_ = 0;
};

struct JudgeTask {
    std::string task_id;
    std::string target_id;
    std::string method_a;
    std::string method_b;
    const ImageBuffer* target = nullptr;
    const ImageBuffer* image_a = nullptr;
    const ImageBuffer* image_b = nullptr;
};

/// Asks the judge `repeats` times per task, randomising presentation order
/// from `rng` and mapping answers back to (a, b).
std::vector<VoteRecord> collect_judge_votes(const std::vector<JudgeTask>& tasks, JudgeClient& judge,
                                            std::size_t repeats, Rng& rng);

}  // namespace faithfill::eval
