#include "trailmine/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "trailmine/error.hpp"
#include "text_util.hpp"

namespace trailmine {

namespace {

struct Judged {
    std::vector<std::string> ranked;
    const std::set<std::string>* relevant = nullptr;
};

MetricsRow summarize(std::string_view system, std::string task_id, std::string list_kind,
                     const std::vector<Judged>& runs, const std::vector<std::optional<double>>& ttfr,
                     std::span<const std::size_t> cutoffs)
{
    MetricsRow row;
    row.system = std::string(system);
    row.task_id = std::move(task_id);
    row.list_kind = std::move(list_kind);
    row.runs = runs.size();
    if (runs.empty()) return row;

    for (auto n : cutoffs) {
        double sum = 0.0;
        for (const auto& r : runs) sum += precision_at_n(r.ranked, *r.relevant, n);
        row.p_at_n[n] = sum / static_cast<double>(runs.size());
    }
    double ap_sum = 0.0;
    for (const auto& r : runs) ap_sum += average_precision(r.ranked, *r.relevant);
    row.map_score = ap_sum / static_cast<double>(runs.size());

    double t_sum = 0.0;
    for (const auto& t : ttfr) {
        if (t) {
            t_sum += *t;
            ++row.runs_with_relevant;
        }
    }
    if (row.runs_with_relevant > 0) {
        row.time_to_first_relevant_s = t_sum / static_cast<double>(row.runs_with_relevant);
    }
    return row;
}

std::string fmt(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
    return std::string(buf, p);
}

}  // namespace

Qrels parse_qrels(std::string_view text)
{
    Qrels q;
    std::size_t line_number = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_number;
        const auto f = detail::split_ws(line);
        if (f.empty()) return;
        if (f.size() != 4) throw ParseError(line_number, "expected 'task_id 0 shot_id relevance'");
        int rel = 0;
        auto [p, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), rel);
        if (ec != std::errc{} || p != f[3].data() + f[3].size()) {
            throw ParseError(line_number, "relevance must be an integer");
        }
        auto& set = q[std::string(f[0])];
        if (rel > 0) set.insert(std::string(f[2]));
    });
    return q;
}

std::string serialize_qrels(const Qrels& qrels)
{
    std::string out;
    for (const auto& [task, shots] : qrels) {
        for (const auto& s : shots) out += task + " 0 " + s + " 1\n";
    }
    return out;
}

std::set<std::string> qrels_union(const Qrels& qrels)
{
    std::set<std::string> out;
    for (const auto& [_, shots] : qrels) out.insert(shots.begin(), shots.end());
    return out;
}

double precision_at_n(std::span<const std::string> ranked, const std::set<std::string>& relevant,
                      std::size_t n)
{
    if (n < 1) throw Error("precision_at_n: n must be >= 1");
    const auto top = std::min(n, ranked.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < top; ++i) {
        if (relevant.contains(ranked[i])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double average_precision(std::span<const std::string> ranked, const std::set<std::string>& relevant)
{
    if (relevant.empty()) throw Error("average_precision: empty relevant set");
    std::size_t hits = 0;
    double sum = 0.0;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        // A repeated id cannot be credited twice.
        if (!seen.insert(ranked[i]).second) continue;
        if (relevant.contains(ranked[i])) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

double mean_average_precision(std::span<const RankedRun> runs, const Qrels& qrels)
{
    if (runs.empty()) throw Error("mean_average_precision: no runs");
    double sum = 0.0;
    for (const auto& r : runs) {
        auto it = qrels.find(r.task_id);
        if (it == qrels.end()) throw Error("no qrels for task '" + r.task_id + "'");
        sum += average_precision(r.ranked, it->second);
    }
    return sum / static_cast<double>(runs.size());
}

std::optional<double> time_to_first_relevant(const Session& session, const std::set<std::string>& relevant)
{
    if (session.events.empty()) return std::nullopt;
    const auto start = session.events.front().timestamp_ms;
    for (const auto& ev : session.events) {
        if (ev.action == ActionType::MarkRelevant && relevant.contains(ev.target)) {
            return static_cast<double>(ev.timestamp_ms - start) / 1000.0;
        }
    }
    return std::nullopt;
}

std::vector<std::string> selected_shots(const Session& session)
{
    std::vector<std::string> order;
    std::map<std::string, bool> marked;
    for (const auto& ev : session.events) {
        if (!is_mark(ev.action)) continue;
        const bool rel = ev.action == ActionType::MarkRelevant;
        auto [it, inserted] = marked.try_emplace(ev.target, rel);
        if (!inserted) it->second = rel;
        if (rel && std::find(order.begin(), order.end(), ev.target) == order.end()) {
            order.push_back(ev.target);
        }
    }
    std::erase_if(order, [&](const std::string& s) { return !marked[s]; });
    return order;
}

std::vector<std::string> interacted_shots(const Session& session, const WeightTable& table)
{
    std::vector<std::string> order;
    std::map<std::string, double> weight;
    for (const auto& ev : session.events) {
        if (ev.action == ActionType::Query) continue;
        if (!weight.contains(ev.target)) order.push_back(ev.target);
        weight[ev.target] += action_weight(ev.action, ev.duration_ms, table);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) { return weight[a] > weight[b]; });
    return order;
}

std::vector<double> default_bin_edges()
{
    return {0, 1, 2, 3, 4, 5, 7, 10, 15, kInf};
}

std::vector<CurveBin> relevance_probability_curve(const TrailGraph& graph,
                                                  const std::set<std::string>& relevant_shots,
                                                  std::span<const double> bin_edges)
{
    if (bin_edges.size() < 2) throw Error("need at least two bin edges");
    if (bin_edges.front() > 0.0) throw Error("first bin edge must be <= 0");
    for (std::size_t i = 1; i < bin_edges.size(); ++i) {
        if (!(bin_edges[i] > bin_edges[i - 1])) throw Error("bin edges must be strictly increasing");
    }

    std::vector<CurveBin> bins;
    for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
        bins.push_back(CurveBin{bin_edges[i], bin_edges[i + 1], 0, 0, 0.0});
    }
    if (std::isfinite(bin_edges.back())) {
        bins.push_back(CurveBin{bin_edges.back(), kInf, 0, 0, 0.0});
    }

    for (TrailGraph::NodeIndex i = 0; i < graph.node_count(); ++i) {
        const auto& n = graph.node(i);
        if (n.kind != NodeKind::Document) continue;
        const double v = graph.interaction_value(n.id);
        auto it = std::upper_bound(bins.begin(), bins.end(), v,
                                   [](double x, const CurveBin& b) { return x < b.hi; });
        if (it == bins.end()) --it;
        it->n_docs += 1;
        if (relevant_shots.contains(std::string(strip_kind(n.id)))) it->n_relevant += 1;
    }
    for (auto& b : bins) {
        b.p_relevant = b.n_docs == 0 ? 0.0 : static_cast<double>(b.n_relevant) / static_cast<double>(b.n_docs);
    }
    return bins;
}

double spearman(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw Error("spearman: size mismatch");
    if (x.size() < 2) throw Error("spearman: need at least two points");

    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

const MetricsRow* MetricsReport::find(std::string_view system, std::string_view task_id,
                                      std::string_view list_kind) const
{
    for (const auto& r : rows) {
        if (r.system == system && r.task_id == task_id && r.list_kind == list_kind) return &r;
    }
    return nullptr;
}

std::string MetricsReport::to_json() const
{
    nlohmann::ordered_json j;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["system"] = r.system;
        row["task_id"] = r.task_id;
        row["list_kind"] = r.list_kind;
        row["runs"] = r.runs;
        nlohmann::ordered_json p = nlohmann::ordered_json::object();
        for (const auto& [n, v] : r.p_at_n) p[std::to_string(n)] = v;
        row["p_at_n"] = p;
        row["map"] = r.map_score;
        row["time_to_first_relevant_s"] =
            r.time_to_first_relevant_s ? nlohmann::ordered_json(*r.time_to_first_relevant_s) : nullptr;
        row["runs_with_relevant"] = r.runs_with_relevant;
        j["rows"].push_back(row);
    }
    j["curve"] = nlohmann::ordered_json::array();
    for (const auto& b : curve) {
        nlohmann::ordered_json bin;
        bin["lo"] = b.lo;
        bin["hi"] = std::isfinite(b.hi) ? nlohmann::ordered_json(b.hi) : nlohmann::ordered_json("inf");
        bin["n_docs"] = b.n_docs;
        bin["n_relevant"] = b.n_relevant;
        bin["p_relevant"] = b.p_relevant;
        j["curve"].push_back(bin);
    }
    return j.dump(2) + "\n";
}

std::string MetricsReport::to_table() const
{
    std::set<std::size_t> cutoffs;
    for (const auto& r : rows) {
        for (const auto& [n, _] : r.p_at_n) cutoffs.insert(n);
    }
    std::ostringstream out;
    out << "system\ttask\tlist\truns";
    for (auto n : cutoffs) out << "\tP@" << n;
    out << "\tMAP\tTTFR_s\truns_with_relevant\n";
    for (const auto& r : rows) {
        out << r.system << '\t' << r.task_id << '\t' << r.list_kind << '\t' << r.runs;
        for (auto n : cutoffs) {
            auto it = r.p_at_n.find(n);
            out << '\t' << (it == r.p_at_n.end() ? std::string("-") : fmt(it->second));
        }
        out << '\t' << fmt(r.map_score) << '\t'
            << (r.time_to_first_relevant_s ? fmt(*r.time_to_first_relevant_s) : std::string("-")) << '\t'
            << r.runs_with_relevant << '\n';
    }
    return out.str();
}

std::string MetricsReport::curve_table() const
{
    std::ostringstream out;
    out << "lo\thi\tn_docs\tn_relevant\tp_relevant\n";
    for (const auto& b : curve) {
        out << fmt(b.lo) << '\t' << (std::isfinite(b.hi) ? fmt(b.hi) : std::string("inf")) << '\t' << b.n_docs
            << '\t' << b.n_relevant << '\t' << fmt(b.p_relevant) << '\n';
    }
    return out.str();
}

std::vector<MetricsRow> evaluate_sessions(std::string_view system, std::span<const Session> sessions,
                                          const Qrels& qrels, const WeightTable& table,
                                          std::span<const std::size_t> cutoffs)
{
    struct Bucket {
        std::vector<Judged> selected;
        std::vector<Judged> interacted;
        std::vector<std::optional<double>> ttfr;
    };
    std::map<std::string, Bucket> by_task;
    Bucket all;

    for (const auto& s : sessions) {
        std::optional<std::string> task;
        for (const auto& ev : s.events) {
            if (ev.task_id) {
                task = ev.task_id;
                break;
            }
        }
        if (!task) continue;
        auto q = qrels.find(*task);
        if (q == qrels.end() || q->second.empty()) continue;

        Judged sel{selected_shots(s), &q->second};
        Judged inter{interacted_shots(s, table), &q->second};
        const auto t = time_to_first_relevant(s, q->second);
        for (auto* b : {&by_task[*task], &all}) {
            b->selected.push_back(sel);
            b->interacted.push_back(inter);
            b->ttfr.push_back(t);
        }
    }

    std::vector<MetricsRow> rows;
    for (const auto& [task, b] : by_task) {
        rows.push_back(summarize(system, task, "selected", b.selected, b.ttfr, cutoffs));
        rows.push_back(summarize(system, task, "interacted", b.interacted, b.ttfr, cutoffs));
    }
    if (!all.selected.empty()) {
        rows.push_back(summarize(system, "all", "selected", all.selected, all.ttfr, cutoffs));
        rows.push_back(summarize(system, "all", "interacted", all.interacted, all.ttfr, cutoffs));
    }
    return rows;
}

std::vector<MetricsRow> evaluate_runs(std::string_view system, std::span<const RankedRun> runs,
                                      const Qrels& qrels, std::span<const std::size_t> cutoffs)
{
    std::map<std::string, std::vector<Judged>> by_task;
    std::vector<Judged> all;
    for (const auto& r : runs) {
        auto q = qrels.find(r.task_id);
        if (q == qrels.end() || q->second.empty()) continue;
        by_task[r.task_id].push_back(Judged{r.ranked, &q->second});
        all.push_back(Judged{r.ranked, &q->second});
    }
    std::vector<MetricsRow> rows;
    for (const auto& [task, judged] : by_task) {
        rows.push_back(summarize(system, task, "ranking", judged, {}, cutoffs));
    }
    if (!all.empty()) rows.push_back(summarize(system, "all", "ranking", all, {}, cutoffs));
    return rows;
}

std::vector<RankedRun> parse_trec_run(std::string_view text)
{
    struct Line {
        std::string shot;
        long rank;
        double score;
    };
    std::map<std::string, std::vector<Line>> by_task;
    std::size_t line_number = 0;
    detail::for_each_line(text, [&](std::string_view line) {
        ++line_number;
        const auto f = detail::split_ws(line);
        if (f.empty()) return;
        if (f.size() != 6) throw ParseError(line_number, "expected 'task_id Q0 shot_id rank score tag'");
        Line l{std::string(f[2]), 0, 0.0};
        auto r1 = std::from_chars(f[3].data(), f[3].data() + f[3].size(), l.rank);
        auto r2 = std::from_chars(f[4].data(), f[4].data() + f[4].size(), l.score);
        if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw ParseError(line_number, "bad rank or score");
        by_task[std::string(f[0])].push_back(std::move(l));
    });
    std::vector<RankedRun> runs;
    for (auto& [task, lines] : by_task) {
        std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.rank < b.rank;
        });
        RankedRun run{task, {}};
        for (auto& l : lines) run.ranked.push_back(std::move(l.shot));
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace trailmine
