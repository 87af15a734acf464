#include "opsched/oracle.hpp"

#include <algorithm>
#include <map>

namespace opsched {

namespace {

struct flat_task {
    task_ref ref;
    rational duration{0};
    std::vector<std::size_t> preds;  // indices into the flat task list
    std::vector<std::size_t> succs;
    rational tail{0};  // longest downstream duration chain, inclusive
};

struct search {
    std::vector<flat_task> tasks;
    int cores = 0;
    std::uint64_t budget = 0;
    std::uint64_t expansions = 0;

    rational best_makespan{0};
    std::vector<rational> best_start;
    std::vector<int> best_core;
    bool have_best = false;

    std::vector<rational> core_avail;
    std::vector<rational> start;
    std::vector<rational> end;
    std::vector<int> core_of;
    std::vector<int> missing_preds;

    void place_greedy_incumbent() {
        // Earliest-start list schedule in (op, unit) order seeds the bound.
        auto missing = missing_preds;
        std::vector<rational> avail(cores, rational(0));
        std::vector<rational> st(tasks.size()), et(tasks.size());
        std::vector<int> cr(tasks.size(), -1);
        std::vector<bool> done(tasks.size(), false);
        for (std::size_t placed = 0; placed < tasks.size(); ++placed) {
            std::size_t pick = tasks.size();
            for (std::size_t t = 0; t < tasks.size(); ++t) {
                if (!done[t] && missing[t] == 0) {
                    pick = t;
                    break;
                }
            }
            rational ready(0);
            for (std::size_t p : tasks[pick].preds) ready = std::max(ready, et[p]);
            const int core = static_cast<int>(
                std::min_element(avail.begin(), avail.end()) - avail.begin());
            st[pick] = std::max(ready, avail[core]);
            et[pick] = st[pick] + tasks[pick].duration;
            cr[pick] = core;
            avail[core] = et[pick];
            done[pick] = true;
            for (std::size_t s : tasks[pick].succs) --missing[s];
        }
        best_makespan = *std::max_element(et.begin(), et.end());
        best_start = st;
        best_core = cr;
        have_best = true;
    }

    rational lower_bound(const rational& cur_max) const {
        rational bound = cur_max;
        // Total work over p cores, counting the busy time already committed.
        rational committed(0);
        for (const rational& a : core_avail) committed += a;
        rational remaining(0);
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (core_of[t] < 0) remaining += tasks[t].duration;
        }
        bound = std::max(bound, (committed + remaining) / cores);
        // Critical path from any unplaced task.
        rational min_avail = core_avail.empty() ? rational(0) : core_avail[0];
        for (const rational& a : core_avail) min_avail = std::min(min_avail, a);
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (core_of[t] >= 0) continue;
            rational est = min_avail;
            for (std::size_t p : tasks[t].preds) {
                if (core_of[p] >= 0) est = std::max(est, end[p]);
            }
            bound = std::max(bound, est + tasks[t].tail);
        }
        return bound;
    }

    void dfs(std::size_t n_placed, const rational& cur_max) {
        if (n_placed == tasks.size()) {
            if (!have_best || cur_max < best_makespan) {
                best_makespan = cur_max;
                best_start = start;
                best_core = core_of;
                have_best = true;
            }
            return;
        }
        if (++expansions > budget) {
            throw oracle_budget_error("oracle budget exceeded", best_makespan);
        }
        if (have_best && lower_bound(cur_max) >= best_makespan) {
            return;
        }
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (core_of[t] >= 0 || missing_preds[t] != 0) continue;
            rational ready(0);
            for (std::size_t p : tasks[t].preds) ready = std::max(ready, end[p]);
            // Identical cores: earliest-start placement on the least-loaded
            // core is dominant, so no branching over cores.
            const int core = static_cast<int>(
                std::min_element(core_avail.begin(), core_avail.end()) - core_avail.begin());
            const rational st = std::max(ready, core_avail[core]);
            const rational et = st + tasks[t].duration;

            const rational saved_avail = core_avail[core];
            core_of[t] = core;
            start[t] = st;
            end[t] = et;
            core_avail[core] = et;
            for (std::size_t s : tasks[t].succs) --missing_preds[s];

            dfs(n_placed + 1, std::max(cur_max, et));

            for (std::size_t s : tasks[t].succs) ++missing_preds[s];
            core_avail[core] = saved_avail;
            core_of[t] = -1;
        }
    }
};

}  // namespace

oracle_result optimal_makespan(const plan_dag& dag, int cores, std::uint64_t budget) {
    if (cores < 1) {
        throw validation_error("core count must be >= 1");
    }
    if (budget == 0) {
        throw validation_error("budget must be positive");
    }
    const task_set ts = expand_tasks(dag);
    if (ts.total_tasks() > oracle_task_limit) {
        throw validation_error("instance too large for the exact oracle (" +
                               std::to_string(ts.total_tasks()) + " tasks, limit " +
                               std::to_string(oracle_task_limit) + ")");
    }

    search s;
    s.cores = cores;
    s.budget = budget;

    std::map<task_ref, std::size_t> index;
    for (std::size_t i = 0; i < ts.n_ops; ++i) {
        for (int j = 0; j < ts.max_units; ++j) {
            if (!ts.task_exists(i, j)) continue;
            index[task_ref{i, j}] = s.tasks.size();
            s.tasks.push_back({task_ref{i, j}, ts.exec_time[i][j], {}, {}, rational(0)});
        }
    }
    for (const auto& [pred, succ] : ts.dependency) {
        s.tasks[index.at(succ)].preds.push_back(index.at(pred));
        s.tasks[index.at(pred)].succs.push_back(index.at(succ));
    }
    // Tasks are emitted in (op, unit) order and dependencies point forward,
    // so a reverse sweep computes tails.
    for (std::size_t t = s.tasks.size(); t-- > 0;) {
        rational longest(0);
        for (std::size_t succ : s.tasks[t].succs) {
            longest = std::max(longest, s.tasks[succ].tail);
        }
        s.tasks[t].tail = longest + s.tasks[t].duration;
    }

    oracle_result result;
    if (s.tasks.empty()) {
        result.schedule.core_count = cores;
        return result;
    }

    s.core_avail.assign(cores, rational(0));
    s.start.assign(s.tasks.size(), rational(0));
    s.end.assign(s.tasks.size(), rational(0));
    s.core_of.assign(s.tasks.size(), -1);
    s.missing_preds.assign(s.tasks.size(), 0);
    for (std::size_t t = 0; t < s.tasks.size(); ++t) {
        s.missing_preds[t] = static_cast<int>(s.tasks[t].preds.size());
    }
    s.place_greedy_incumbent();
    s.dfs(0, rational(0));

    result.makespan = s.best_makespan;
    result.expansions = s.expansions;
    result.schedule.core_count = cores;
    result.schedule.start.assign(ts.n_ops, std::vector<rational>(ts.max_units, rational(0)));
    result.schedule.end = result.schedule.start;
    result.schedule.core.assign(ts.n_ops, std::vector<int>(ts.max_units, -1));
    for (std::size_t t = 0; t < s.tasks.size(); ++t) {
        const task_ref ref = s.tasks[t].ref;
        result.schedule.start[ref.op][ref.unit] = s.best_start[t];
        result.schedule.end[ref.op][ref.unit] = s.best_start[t] + s.tasks[t].duration;
        result.schedule.core[ref.op][ref.unit] = s.best_core[t];
    }
    return result;
}

audit_result audit_greedy(const plan_dag& dag, int cores, std::uint64_t budget) {
    audit_result out;
    const segmentation seg = partition(dag);
    const bulk_schedule sched = bulk_assignment(seg, dag, cores);
    out.greedy = realize(dag, sched).second;
    out.optimal = optimal_makespan(dag, cores, budget).makespan;
    out.ratio = out.optimal == rational(0) ? rational(1) : out.greedy / out.optimal;
    return out;
}

}  // namespace opsched
