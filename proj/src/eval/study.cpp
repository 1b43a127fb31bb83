#include "faithfill/eval/study.hpp"

#include "faithfill/core/error.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace faithfill::eval {

std::string_view judge_kind_name(JudgeKind kind) { return kind == JudgeKind::gpt ? "gpt" : "human"; }

JudgeKind parse_judge_kind(std::string_view name) {
    if (name == "human") return JudgeKind::human;
    if (name == "gpt") return JudgeKind::gpt;
    throw ValidationError("unknown judge kind '" + std::string(name) + "'");
}

std::vector<VoteRecord> parse_votes(std::string_view text) {
    std::vector<VoteRecord> records;
    std::istringstream lines{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto fail = [&](const std::string& why) {
            throw ValidationError("votes line " + std::to_string(line_no) + ": " + why);
        };
        VoteRecord r;
        bool seen_methods = false, seen_votes = false, seen_task = false;
        std::istringstream fields(line);
        std::string field;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) fail("expected key=value, got '" + field + "'");
            const std::string key = field.substr(0, eq);
            const std::string value = field.substr(eq + 1);
            if (key == "task") {
                r.task_id = value;
                seen_task = true;
            } else if (key == "target") {
                r.target_id = value;
            } else if (key == "methods") {
                const auto comma = value.find(',');
                if (comma == std::string::npos || comma == 0 || comma + 1 == value.size()) {
                    fail("methods must be '<a>,<b>'");
                }
                r.method_a = value.substr(0, comma);
                r.method_b = value.substr(comma + 1);
                if (r.method_a == r.method_b) fail("a record must compare two different methods");
                seen_methods = true;
            } else if (key == "judge") {
                try {
                    r.judge_kind = parse_judge_kind(value);
                } catch (const ValidationError& e) {
                    fail(e.what());
                }
            } else if (key == "randomized") {
                if (value != "0" && value != "1") fail("randomized must be 0 or 1");
                r.randomized_order = value == "1";
            } else if (key == "votes") {
                for (char c : value) {
                    if (c != 'a' && c != 'b') fail(std::string("vote '") + c + "' is not a or b");
                    r.votes.push_back(static_cast<Choice>(c));
                }
                seen_votes = true;
            } else {
                fail("unknown key '" + key + "'");
            }
        }
        if (!seen_task) fail("missing task=");
        if (!seen_methods) fail("missing methods=");
        if (!seen_votes || r.votes.empty()) fail("record has no votes");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<VoteRecord> load_votes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read votes file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_votes(buffer.str());
}

std::string format_vote(const VoteRecord& r) {
    std::string votes;
    for (Choice c : r.votes) votes.push_back(static_cast<char>(c));
    std::string line = "task=" + r.task_id;
    if (!r.target_id.empty()) line += " target=" + r.target_id;
    line += " methods=" + r.method_a + "," + r.method_b + " judge=" + std::string(judge_kind_name(r.judge_kind)) +
            " randomized=" + (r.randomized_order ? "1" : "0") + " votes=" + votes;
    return line;
}

std::vector<PreferenceSummary> aggregate_preferences(const std::vector<VoteRecord>& records) {
    if (records.empty()) throw ValidationError("no vote records");
    using Key = std::tuple<int, std::string, std::string>;
    std::map<Key, PreferenceSummary> groups;
    std::map<std::pair<int, std::pair<std::string, std::string>>, bool> first_order;
    for (const auto& r : records) {
        if (r.votes.empty()) throw ValidationError("record '" + r.task_id + "' has no votes");
        const int judge = static_cast<int>(r.judge_kind);
        // The first orientation seen for an unordered pair is canonical.
        const auto unordered = std::minmax(r.method_a, r.method_b);
        auto [it, inserted] = first_order.try_emplace({judge, {unordered.first, unordered.second}},
                                                      r.method_a == unordered.first);
        const bool canonical_low_first = it->second;
        const bool swap = (r.method_a == unordered.first) != canonical_low_first;
        const std::string& a = swap ? r.method_b : r.method_a;
        const std::string& b = swap ? r.method_a : r.method_b;

        auto& s = groups[{judge, a, b}];
        s.judge_kind = r.judge_kind;
        s.method_a = a;
        s.method_b = b;
        std::size_t for_a = 0;
        for (Choice c : r.votes) for_a += (c == Choice::a) != swap;
        const std::size_t for_b = r.votes.size() - for_a;
        s.votes_a += for_a;
        s.votes_b += for_b;
        ++s.tasks;
        if (for_a > for_b) ++s.majority_a;
        else if (for_b > for_a) ++s.majority_b;
        else ++s.majority_ties;
    }
    std::vector<PreferenceSummary> out;
    for (auto& [key, s] : groups) {
        const double total = static_cast<double>(s.votes_a + s.votes_b);
        s.percent_a = 100.0 * static_cast<double>(s.votes_a) / total;
        s.percent_b = 100.0 * static_cast<double>(s.votes_b) / total;
        out.push_back(s);
    }
    return out;
}

std::pair<double, double> margin_to_shares(double margin) {
    if (!(margin >= -100.0 && margin <= 100.0)) throw ValidationError("margin must lie in [-100, 100]");
    return {(100.0 + margin) / 2.0, (100.0 - margin) / 2.0};
}

std::string format_percent(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", value);
    return buf;
}

std::string render_preferences(const std::vector<PreferenceSummary>& summaries) {
    std::string out;
    for (const auto& s : summaries) {
        out += std::string(judge_kind_name(s.judge_kind)) + ": " + s.method_a + " " + format_percent(s.percent_a) +
               "% vs " + s.method_b + " " + format_percent(s.percent_b) + "% (" +
               std::to_string(s.votes_a + s.votes_b) + " votes; task majorities " + std::to_string(s.majority_a) +
               "/" + std::to_string(s.majority_b) + "/" + std::to_string(s.majority_ties) + " of " +
               std::to_string(s.tasks) + ")\n";
    }
    return out;
}

JudgeResponse CannedJudge::judge(const ImageBuffer&, const ImageBuffer&, const ImageBuffer&) {
    if (next_ >= responses_.size()) throw RuntimeFailure("canned judge ran out of responses");
    return responses_[next_++];
}

std::vector<VoteRecord> collect_judge_votes(const std::vector<JudgeTask>& tasks, JudgeClient& judge,
                                            std::size_t repeats, Rng& rng) {
    if (repeats < 1) throw ValidationError("repeats must be >= 1");
    std::vector<VoteRecord> records;
    for (const auto& task : tasks) {
        if (!task.target || !task.image_a || !task.image_b) {
            throw ValidationError("judge task '" + task.task_id + "' is missing an image");
        }
        VoteRecord r{task.task_id, task.target_id, task.method_a, task.method_b, {}, JudgeKind::gpt, true};
        for (std::size_t i = 0; i < repeats; ++i) {
            const bool flipped = rng.uniform() < 0.5;
            const auto response = flipped ? judge.judge(*task.target, *task.image_b, *task.image_a)
                                          : judge.judge(*task.target, *task.image_a, *task.image_b);
            const bool first = response.choice == Choice::a;
            r.votes.push_back(first != flipped ? Choice::a : Choice::b);
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace faithfill::eval
