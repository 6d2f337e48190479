#pragma once

// Minimal finite-domain solver: integer interval domains, constraints of the
// form c*U <= d*V, bounds-consistency propagation to a fixpoint and
// depth-first labeling that tries values in ascending order.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cardmed::fd {

using value_t = std::int64_t;

/// Largest coefficient or domain bound accepted; keeps every product in 64 bits.
inline constexpr value_t max_magnitude = value_t{1} << 30;

struct Domain {
    value_t lo = 0;
    value_t hi = -1;

    constexpr bool empty() const noexcept { return lo > hi; }
    constexpr bool fixed() const noexcept { return lo == hi; }
    constexpr value_t size() const noexcept { return empty() ? 0 : hi - lo + 1; }
    friend constexpr bool operator==(const Domain&, const Domain&) noexcept = default;
};

using VarId = std::size_t;

struct FdVariable {
    std::string name;
    Domain domain;
};

/// left_coeff * left_var <= right_coeff * right_var
struct ProductInequality {
    value_t left_coeff;
    VarId left_var;
    value_t right_coeff;
    VarId right_var;
};

class Problem {
public:
    VarId add_variable(std::string name, value_t lo, value_t hi) {
        if (lo > hi) throw std::invalid_argument("fd: variable '" + name + "' has an empty domain");
        if (lo < 1) throw std::invalid_argument("fd: domain of '" + name + "' must start at 1 or above");
        if (hi > max_magnitude) throw std::out_of_range("fd: domain of '" + name + "' out of range");
        vars_.push_back({std::move(name), {lo, hi}});
        return vars_.size() - 1;
    }

    void add(const ProductInequality& c) {
        if (c.left_var >= vars_.size() || c.right_var >= vars_.size())
            throw std::out_of_range("fd: constraint references an unknown variable");
        if (c.left_coeff < 0 || c.right_coeff < 0)
            throw std::invalid_argument("fd: coefficients must be non-negative");
        if (c.left_coeff > max_magnitude || c.right_coeff > max_magnitude)
            throw std::out_of_range("fd: coefficient out of range");
        constraints_.push_back(c);
    }

    /// coeff_l * l <= coeff_r * r
    void add_leq(value_t coeff_l, VarId l, value_t coeff_r, VarId r) { add({coeff_l, l, coeff_r, r}); }

    const std::vector<FdVariable>& variables() const noexcept { return vars_; }
    const std::vector<ProductInequality>& constraints() const noexcept { return constraints_; }

    std::vector<Domain> initial_domains() const {
        std::vector<Domain> d;
        d.reserve(vars_.size());
        for (const auto& v : vars_) d.push_back(v.domain);
        return d;
    }

private:
    std::vector<FdVariable> vars_;
    std::vector<ProductInequality> constraints_;
};

namespace detail {

constexpr value_t floor_div(value_t a, value_t b) noexcept {
    value_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr value_t ceil_div(value_t a, value_t b) noexcept { return -floor_div(-a, b); }

}  // namespace detail

/// Narrows `domains` in place to bounds consistency. For c*U <= d*V:
///   V.lo >= ceil(c*U.lo / d)   and   U.hi <= floor(d*V.hi / c).
/// Returns false when some domain empties (the store is inconsistent).
inline bool propagate(std::span<Domain> domains, std::span<const ProductInequality> constraints) {
    for (const auto& d : domains)
        if (d.empty()) return false;

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& c : constraints) {
            Domain& u = domains[c.left_var];
            Domain& v = domains[c.right_var];
            if (c.left_coeff == 0) continue;  // 0 <= d*V always holds on non-negative domains
            if (c.right_coeff > 0) {
                const value_t need = detail::ceil_div(c.left_coeff * u.lo, c.right_coeff);
                if (need > v.lo) {
                    v.lo = need;
                    changed = true;
                    if (v.empty()) return false;
                }
            }
            const value_t allow = detail::floor_div(c.right_coeff * v.hi, c.left_coeff);
            if (allow < u.hi) {
                u.hi = allow;
                changed = true;
                if (u.empty()) return false;
            }
        }
    }
    return true;
}

/// Reduced domains of `p`, or nullopt when propagation proves inconsistency.
inline std::optional<std::vector<Domain>> propagate(const Problem& p) {
    auto doms = p.initial_domains();
    if (!propagate(std::span<Domain>(doms), std::span<const ProductInequality>(p.constraints())))
        return std::nullopt;
    return doms;
}

/// One value per variable, in the problem's variable order.
class Assignment {
public:
    Assignment() = default;
    Assignment(const Problem& p, std::vector<value_t> values) : values_(std::move(values)) {
        names_.reserve(p.variables().size());
        for (const auto& v : p.variables()) names_.push_back(v.name);
    }

    value_t operator[](VarId i) const { return values_.at(i); }

    value_t at(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return values_[i];
        throw std::out_of_range("fd: no variable named '" + name + "'");
    }

    const std::vector<value_t>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    value_t sum() const noexcept {
        value_t s = 0;
        for (auto v : values_) s += v;
        return s;
    }

    friend bool operator==(const Assignment& a, const Assignment& b) noexcept { return a.values_ == b.values_; }

private:
    std::vector<std::string> names_;
    std::vector<value_t> values_;
};

/// Lazy depth-first enumeration of all solutions. Variables are fixed in
/// problem order, values ascending from each domain's lower bound, with a
/// propagation pass after each choice. Solutions therefore come out in
/// lexicographic order of the variable list.
class Labeler {
public:
    explicit Labeler(const Problem& p) : problem_(&p) {
        auto root = p.initial_domains();
        if (!propagate(std::span<Domain>(root), std::span<const ProductInequality>(p.constraints()))) return;
        if (root.empty()) {
            pending_empty_solution_ = true;
            return;
        }
        stack_.push_back({std::move(root), 0, 0});
        stack_.back().next_value = stack_.back().domains[0].lo;
    }

    /// Prune every branch whose lower-bound sum is not strictly below `limit`.
    void restrict_sum_below(value_t limit) noexcept { sum_limit_ = limit; }

    std::optional<Assignment> next() {
        if (pending_empty_solution_) {
            pending_empty_solution_ = false;
            return Assignment(*problem_, {});
        }
        while (!stack_.empty()) {
            Frame& top = stack_.back();
            if (top.next_value > top.domains[top.var].hi) {
                stack_.pop_back();
                continue;
            }
            const value_t v = top.next_value++;
            const VarId var = top.var;
            std::vector<Domain> child = top.domains;
            child[var] = {v, v};
            if (!propagate(std::span<Domain>(child), std::span<const ProductInequality>(problem_->constraints())))
                continue;
            if (sum_limit_ && lower_bound_sum(child) >= *sum_limit_) continue;
            if (var + 1 == child.size()) {
                std::vector<value_t> values;
                values.reserve(child.size());
                for (const auto& d : child) values.push_back(d.lo);
                return Assignment(*problem_, std::move(values));
            }
            const value_t first = child[var + 1].lo;
            stack_.push_back({std::move(child), var + 1, first});
        }
        return std::nullopt;
    }

    /// Drains the remaining solutions.
    std::vector<Assignment> all() {
        std::vector<Assignment> out;
        while (auto a = next()) out.push_back(std::move(*a));
        return out;
    }

private:
    struct Frame {
        std::vector<Domain> domains;
        VarId var;
        value_t next_value;
    };

    static value_t lower_bound_sum(const std::vector<Domain>& doms) noexcept {
        value_t s = 0;
        for (const auto& d : doms) s += d.lo;
        return s;
    }

    const Problem* problem_;
    std::vector<Frame> stack_;
    std::optional<value_t> sum_limit_;
    bool pending_empty_solution_ = false;
};

/// First solution in lexicographic order.
inline std::optional<Assignment> first_solution(const Problem& p) { return Labeler(p).next(); }

/// Solution with the smallest sum of values; ties go to the lexicographically
/// first one. Branch and bound over the same labeling order.
inline std::optional<Assignment> minimize_sum(const Problem& p) {
    Labeler labeler(p);
    std::optional<Assignment> best;
    while (auto a = labeler.next()) {
        labeler.restrict_sum_below(a->sum());
        best = std::move(a);
    }
    return best;
}

// ============================================================================
// Two-service mediation queries
// ============================================================================

struct InvocationPair {
    value_t sender_calls;
    value_t receiver_calls;
    friend constexpr bool operator==(const InvocationPair&, const InvocationPair&) noexcept = default;
};

/// Sender emits [sender_min, sender_max] per call, receiver accepts
/// [receiver_min, receiver_max] per call; call counts range over [1, cap].
struct MediationQuery {
    value_t sender_min;
    value_t sender_max;
    value_t receiver_min;
    value_t receiver_max;
    value_t sender_cap;
    value_t receiver_cap;
};

namespace detail {

inline void check_query(const MediationQuery& q) {
    if (q.sender_min < 0 || q.receiver_min < 0 || q.sender_min > q.sender_max || q.receiver_min > q.receiver_max)
        throw std::invalid_argument("mediation query needs well-formed sender and receiver intervals");
    if (q.sender_cap < 1 || q.receiver_cap < 1) throw std::invalid_argument("mediation query needs caps >= 1");
}

}  // namespace detail

/// Variables sender_calls, receiver_calls (in that order) with
///   receiver_min*receiver_calls <= sender_min*sender_calls
///   sender_max*sender_calls <= receiver_max*receiver_calls
/// i.e. every possible emission total fits some delivery window.
inline Problem subset_problem(const MediationQuery& q) {
    detail::check_query(q);
    Problem p;
    const VarId s = p.add_variable("sender_calls", 1, q.sender_cap);
    const VarId r = p.add_variable("receiver_calls", 1, q.receiver_cap);
    p.add_leq(q.receiver_min, r, q.sender_min, s);
    p.add_leq(q.sender_max, s, q.receiver_max, r);
    return p;
}

/// Same variables with
///   sender_min*sender_calls <= receiver_max*receiver_calls
///   receiver_min*receiver_calls <= sender_max*sender_calls
/// i.e. the scaled emission and delivery intervals overlap.
inline Problem intersection_problem(const MediationQuery& q) {
    detail::check_query(q);
    Problem p;
    const VarId s = p.add_variable("sender_calls", 1, q.sender_cap);
    const VarId r = p.add_variable("receiver_calls", 1, q.receiver_cap);
    p.add_leq(q.sender_min, s, q.receiver_max, r);
    p.add_leq(q.receiver_min, r, q.sender_max, s);
    return p;
}

/// Lexicographically smallest solution of subset_problem(q).
inline std::optional<InvocationPair> basic_mediation(const MediationQuery& q) {
    if (auto s = first_solution(subset_problem(q))) return InvocationPair{(*s)[0], (*s)[1]};
    return std::nullopt;
}

/// Lexicographically smallest solution of intersection_problem(q).
inline std::optional<InvocationPair> probable_mediation(const MediationQuery& q) {
    if (auto s = first_solution(intersection_problem(q))) return InvocationPair{(*s)[0], (*s)[1]};
    return std::nullopt;
}

}  // namespace cardmed::fd
