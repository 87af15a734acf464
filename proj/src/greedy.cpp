#include "opsched/greedy.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>

namespace opsched {

bool batch_assignment::contains(int op) const {
    return std::find(ops.begin(), ops.end(), op) != ops.end();
}

dominant_state compute_dominant(const batch_assignment& batch, const plan_dag& dag) {
    dominant_state st;
    for (std::size_t i = 0; i < batch.ops.size(); ++i) {
        st.amt.push_back(dag.op(batch.ops[i]).unit_time / batch.cores_for(i));
        st.cores.push_back(batch.cores_for(i));
    }
    for (std::size_t i = 0; i < st.amt.size(); ++i) {
        if (st.amt[i] > st.dom_time) {
            st.dom_time = st.amt[i];
            st.dom_index = i;
        }
    }
    return st;
}

rational saved_time_unassigned(const plan_op& op, const rational& dom_time, int total_cores) {
    const rational deferred = op.unit_time * op.units / total_cores;  // DP(op)
    const rational next_dom = std::max(dom_time, op.unit_time);
    return op.units * dom_time + deferred - op.units * next_dom;
}

rational saved_time_dominant(const dominant_state& state, const plan_op& dominant_op) {
    if (state.amt.empty()) {
        throw std::invalid_argument("saved_time_dominant: empty assignment");
    }
    if (dominant_op.para != para_cap::data_parallel) {
        throw std::invalid_argument("saved_time_dominant: dominant operator " +
                                    std::to_string(dominant_op.id) + " is serialized");
    }
    rational next_dom(0);
    for (std::size_t i = 0; i < state.amt.size(); ++i) {
        const rational amortized =
            i == state.dom_index
                ? state.amt[i] * state.cores[i] / (state.cores[i] + 1)
                : state.amt[i];
        next_dom = std::max(next_dom, amortized);
    }
    return dominant_op.units * (state.dom_time - next_dom);
}

bool early_stop(const plan_op& op, const rational& dom_time, int total_cores,
                int remaining_cores) {
    const rational deferred = op.unit_time * op.units / total_cores;
    const rational parallel_rest = op.unit_time * op.units / remaining_cores;
    return op.units * dom_time + deferred - parallel_rest < rational(0);
}

dch_verdict execute_dch_rule(int head, const detached_chain_map& dcm,
                             const std::set<int>& assigned, const std::vector<int>& batch_l,
                             const plan_dag& dag) {
    const auto it = dcm.find(head);
    if (it == dcm.end()) {
        throw std::invalid_argument("execute_dch_rule: operator " + std::to_string(head) +
                                    " is not a detached chain head");
    }
    std::vector<int> unassigned;
    for (int parent : it->second) {
        if (!assigned.count(parent)) unassigned.push_back(parent);
    }
    if (unassigned.empty()) {
        return dch_verdict::admissible;
    }
    if (unassigned.size() == 1 &&
        std::find(batch_l.begin(), batch_l.end(), unassigned[0]) != batch_l.end()) {
        const plan_op& op = dag.op(head);
        if (!op.cap_on) {
            throw validation_error("configuration: detached chain head " +
                                   std::to_string(head) +
                                   " needs cap_on metadata for the pipeline check");
        }
        if (*op.cap_on == unassigned[0] &&
            (op.pipe == pipe_cap::full_pipe || op.pipe == pipe_cap::input_pipe)) {
            return dch_verdict::pipeline_admissible;
        }
    }
    return dch_verdict::discard;
}

namespace {

class batch_builder {
public:
    batch_builder(std::vector<candidate_segment> cands, const std::set<int>& assigned,
                  const detached_chain_map& dcm, int cores, const plan_dag& dag,
                  const std::vector<std::vector<int>>& queued)
        : cands_(std::move(cands)),
          assigned_(assigned),
          dcm_(dcm),
          cores_(cores),
          dag_(dag),
          queued_(queued),
          dead_(cands_.size(), false) {}

    single_batch_result run() {
        for (auto& cand : cands_) drain(cand);
        initialize();
        grant_loop();
        return {std::move(batch_), std::move(cands_), std::move(discarded_)};
    }

private:
    bool taken(int op) const { return assigned_.count(op) || batch_.contains(op); }

    // Pops candidates already executed by another chain (duplicated
    // detached suffixes drain behind the chain that ran them).
    void drain(candidate_segment& cand) {
        while (!cand.ops.empty() && taken(cand.ops.front())) {
            cand.ops.pop_front();
            cand.head_pending = false;
        }
    }

    enum class gate { grant, stall, discard_chain };

    gate check(const candidate_segment& cand) const {
        const int op = cand.ops.front();
        if (dcm_.count(op)) {
            switch (execute_dch_rule(op, dcm_, assigned_, batch_.ops, dag_)) {
                case dch_verdict::admissible:
                case dch_verdict::pipeline_admissible:
                    return gate::grant;
                case dch_verdict::discard:
                    return gate::discard_chain;
            }
        }
        for (int parent : dag_.parents(op)) {
            if (assigned_.count(parent)) continue;
            // Mid-segment operators follow their in-segment predecessor
            // within the round; fresh heads wait for earlier rounds.
            if (!cand.head_pending && batch_.contains(parent)) continue;
            return gate::stall;
        }
        return gate::grant;
    }

    // A detached suffix may only be deleted while some other live chain
    // still carries its head; otherwise the chain stalls until the head
    // becomes admissible.
    bool other_carrier_exists(std::size_t chain, int head) const {
        for (std::size_t j = 0; j < cands_.size(); ++j) {
            if (j == chain || dead_[j]) continue;
            const auto& ops = cands_[j].ops;
            if (std::find(ops.begin(), ops.end(), head) != ops.end()) return true;
            if (j < queued_.size()) {
                const auto& q = queued_[j];
                if (std::find(q.begin(), q.end(), head) != q.end()) return true;
            }
        }
        return false;
    }

    void apply_discard(std::size_t chain) {
        if (other_carrier_exists(chain, cands_[chain].ops.front())) {
            discarded_.push_back(cands_[chain].chain_index);
            cands_[chain].ops.clear();
            dead_[chain] = true;
        }
        // else: sole carrier of the suffix; stall until admissible.
    }

    void grant(std::size_t chain) {
        const int op = cands_[chain].ops.front();
        if (taken(op)) {
            throw std::logic_error("internal: operator " + std::to_string(op) +
                                   " scheduled twice");
        }
        cands_[chain].ops.pop_front();
        cands_[chain].head_pending = false;
        batch_.ops.push_back(op);
        batch_.cores.push_back({next_core_++});
        dominant_ = compute_dominant(batch_, dag_);
    }

    void grant_dominant() {
        batch_.cores[dominant_.dom_index].push_back(next_core_++);
        dominant_ = compute_dominant(batch_, dag_);
    }

    void initialize() {
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < cands_.size(); ++i) {
            if (!cands_[i].ops.empty()) order.push_back(i);
        }
        if (static_cast<int>(order.size()) > cores_) {
            // More chains than cores: favor the heads with the largest
            // total work, ties by chain index.
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return dag_.op(cands_[a].ops.front()).total_time() >
                       dag_.op(cands_[b].ops.front()).total_time();
            });
        }
        for (std::size_t i : order) {
            if (next_core_ == cores_) break;
            drain(cands_[i]);
            if (cands_[i].ops.empty() || dead_[i]) continue;
            switch (check(cands_[i])) {
                case gate::grant:
                    grant(i);
                    break;
                case gate::discard_chain:
                    apply_discard(i);
                    break;
                case gate::stall:
                    break;
            }
        }
    }

    void grant_loop() {
        while (next_core_ < cores_) {
            struct scored {
                std::size_t chain;
                rational saved;
            };
            std::vector<scored> cands;
            for (std::size_t i = 0; i < cands_.size(); ++i) {
                drain(cands_[i]);
                if (cands_[i].ops.empty() || dead_[i]) continue;
                cands.push_back(
                    {i, saved_time_unassigned(dag_.op(cands_[i].ops.front()),
                                              dominant_.dom_time, cores_)});
            }
            std::stable_sort(cands.begin(), cands.end(),
                             [](const scored& a, const scored& b) { return a.saved > b.saved; });

            std::optional<rational> dom_saved;
            if (!batch_.ops.empty() &&
                dag_.op(batch_.ops[dominant_.dom_index]).para == para_cap::data_parallel) {
                dom_saved = saved_time_dominant(
                    dominant_, dag_.op(batch_.ops[dominant_.dom_index]));
            }

            std::optional<scored> runner;
            for (const scored& c : cands) {
                switch (check(cands_[c.chain])) {
                    case gate::grant:
                        runner = c;
                        break;
                    case gate::discard_chain:
                        apply_discard(c.chain);
                        continue;
                    case gate::stall:
                        continue;
                }
                break;
            }

            if (!runner) {
                // No admissible candidate: the core would idle, so a
                // data-parallel dominant takes it even on a zero saving
                // (splitting units more ways never slows execution down).
                if (dom_saved) {
                    grant_dominant();
                    continue;
                }
                break;
            }
            if (dom_saved && *dom_saved > runner->saved) {
                grant_dominant();
                continue;
            }
            if (!batch_.ops.empty() &&
                early_stop(dag_.op(cands_[runner->chain].ops.front()), dominant_.dom_time,
                           cores_, cores_ - next_core_)) {
                break;
            }
            grant(runner->chain);
        }
    }

    std::vector<candidate_segment> cands_;
    const std::set<int>& assigned_;
    const detached_chain_map& dcm_;
    int cores_;
    const plan_dag& dag_;
    const std::vector<std::vector<int>>& queued_;

    std::vector<bool> dead_;
    batch_assignment batch_;
    dominant_state dominant_;
    std::vector<int> discarded_;
    int next_core_ = 0;
};

}  // namespace

single_batch_result single_batch_assignment(std::vector<candidate_segment> candidates,
                                            const std::set<int>& assigned,
                                            const detached_chain_map& dcm, int cores,
                                            const plan_dag& dag,
                                            const std::vector<std::vector<int>>& queued) {
    if (cores < 1) {
        throw validation_error("core count must be >= 1");
    }
    return batch_builder(std::move(candidates), assigned, dcm, cores, dag, queued).run();
}

bulk_schedule bulk_assignment(const segmentation& seg, const plan_dag& dag, int cores) {
    if (cores < 1) {
        throw validation_error("core count must be >= 1");
    }
    const std::size_t n_chains = seg.chains.size();
    std::vector<candidate_segment> cands(n_chains);
    std::vector<std::deque<segment>> pending(n_chains);
    for (std::size_t i = 0; i < n_chains; ++i) {
        cands[i].chain_index = static_cast<int>(i);
        for (const segment& s : seg.segments[i]) {
            pending[i].emplace_back(s);
        }
        if (!pending[i].empty()) {
            const segment s = pending[i].front();
            pending[i].pop_front();
            cands[i].ops.assign(s.ops.begin(), s.ops.end());
        }
    }

    bulk_schedule sched;
    sched.core_count = cores;
    std::set<int> assigned;

    auto remaining = [&]() {
        std::size_t total = 0;
        for (std::size_t i = 0; i < n_chains; ++i) {
            total += cands[i].ops.size();
            for (const segment& s : pending[i]) total += s.ops.size();
        }
        return total;
    };

    while (remaining() > 0) {
        const std::size_t before = remaining();

        std::vector<std::vector<int>> queued(n_chains);
        for (std::size_t i = 0; i < n_chains; ++i) {
            for (const segment& s : pending[i]) {
                queued[i].insert(queued[i].end(), s.ops.begin(), s.ops.end());
            }
        }

        single_batch_result result =
            single_batch_assignment(std::move(cands), assigned, seg.dcm, cores, dag, queued);
        cands = std::move(result.candidates);

        for (int op : result.batch.ops) {
            if (!assigned.insert(op).second) {
                throw std::logic_error("internal: operator " + std::to_string(op) +
                                       " scheduled twice across batches");
            }
        }
        if (!result.batch.ops.empty()) {
            sched.batches.push_back(std::move(result.batch));
            sched.discarded.push_back(result.discarded);
        }
        for (int chain : result.discarded) {
            cands[static_cast<std::size_t>(chain)].ops.clear();
            pending[static_cast<std::size_t>(chain)].clear();
        }
        for (std::size_t i = 0; i < n_chains; ++i) {
            if (cands[i].ops.empty() && !pending[i].empty()) {
                const segment s = pending[i].front();
                pending[i].pop_front();
                cands[i].ops.assign(s.ops.begin(), s.ops.end());
                cands[i].head_pending = true;
            }
        }

        if (remaining() == before && result.batch.ops.empty() && result.discarded.empty()) {
            throw std::logic_error("internal: scheduling made no progress");
        }
    }
    return sched;
}

namespace {

bool pipeline_input_ok(const plan_dag& dag, int parent, int op) {
    const plan_op& child = dag.op(op);
    if (child.pipe != pipe_cap::full_pipe && child.pipe != pipe_cap::input_pipe) {
        return false;
    }
    if (child.cap_on) {
        return *child.cap_on == parent;
    }
    return dag.parents(op).size() == 1;
}

}  // namespace

std::vector<bulk_violation> validate_bulk(const plan_dag& dag, const bulk_schedule& sched) {
    std::vector<bulk_violation> report;
    std::map<int, int> batch_of;

    for (std::size_t b = 0; b < sched.batches.size(); ++b) {
        const batch_assignment& batch = sched.batches[b];
        const int bi = static_cast<int>(b);
        if (batch.ops.size() != batch.cores.size()) {
            report.push_back({bi, -1, "ops/cores lists disagree"});
            continue;
        }
        std::set<int> used_cores;
        for (std::size_t i = 0; i < batch.ops.size(); ++i) {
            const int op = batch.ops[i];
            if (!dag.contains(op)) {
                report.push_back({bi, op, "unknown operator"});
                continue;
            }
            if (batch.cores[i].empty()) {
                report.push_back({bi, op, "operator holds no core"});
            }
            for (int core : batch.cores[i]) {
                if (core < 0 || core >= sched.core_count) {
                    report.push_back({bi, op, "core id out of range"});
                } else if (!used_cores.insert(core).second) {
                    report.push_back({bi, op, "core granted to two operators"});
                }
            }
            if (dag.op(op).para == para_cap::serialized && batch.cores[i].size() > 1) {
                report.push_back({bi, op, "serialized operator holds several cores"});
            }
            auto [it, fresh] = batch_of.insert({op, bi});
            if (!fresh) {
                report.push_back({bi, op, "operator already assigned in batch " +
                                              std::to_string(it->second)});
            }
        }
    }

    for (const plan_op& op : dag.operators()) {
        if (!batch_of.count(op.id)) {
            report.push_back({-1, op.id, "operator never assigned"});
        }
    }

    for (const auto& [src, dst] : dag.edges()) {
        const auto si = batch_of.find(src);
        const auto di = batch_of.find(dst);
        if (si == batch_of.end() || di == batch_of.end()) continue;
        if (si->second < di->second) continue;
        if (si->second == di->second && pipeline_input_ok(dag, src, dst)) continue;
        report.push_back({di->second, dst,
                          "predecessor " + std::to_string(src) + " not assigned earlier"});
    }
    return report;
}

nlohmann::json bulk_to_json(const bulk_schedule& sched) {
    using nlohmann::json;
    json batches = json::array();
    for (const batch_assignment& batch : sched.batches) {
        batches.push_back(json{{"ops", batch.ops}, {"cores", batch.cores}});
    }
    return json{{"p", sched.core_count},
                {"batches", std::move(batches)},
                {"discarded", sched.discarded}};
}

bulk_schedule bulk_from_json(const nlohmann::json& doc) {
    bulk_schedule sched;
    sched.core_count = doc.at("p").get<int>();
    for (const auto& b : doc.at("batches")) {
        batch_assignment batch;
        batch.ops = b.at("ops").get<std::vector<int>>();
        batch.cores = b.at("cores").get<std::vector<std::vector<int>>>();
        sched.batches.push_back(std::move(batch));
    }
    if (doc.contains("discarded")) {
        sched.discarded = doc.at("discarded").get<std::vector<std::vector<int>>>();
    }
    return sched;
}

}  // namespace opsched
