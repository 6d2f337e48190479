#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace cardmed {

/// Base of every error raised by the library. Domain errors on interval
/// arithmetic use std::domain_error / std::overflow_error directly.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A service or flow lacks what planning needs (e.g. no active constraint).
class configuration_error : public error {
public:
    using error::error;
};

class mediation_error : public error {
public:
    using error::error;
};

class selection_shortfall : public mediation_error {
public:
    selection_shortfall(std::size_t requested, std::size_t available)
        : mediation_error("selection shortfall: requested " + std::to_string(requested) +
                          " element(s) but only " + std::to_string(available) +
                          " can be selected (deficit " + std::to_string(requested - available) + ")"),
          requested_(requested), available_(available) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }
    std::size_t deficit() const noexcept { return requested_ - available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

class merge_policy_error : public mediation_error {
public:
    using mediation_error::mediation_error;
};

class partition_error : public mediation_error {
public:
    using mediation_error::mediation_error;
};

class order_violation : public mediation_error {
public:
    using mediation_error::mediation_error;
};

class invocation_budget_exceeded : public error {
public:
    invocation_budget_exceeded(const std::string& service, std::uint64_t budget)
        : error("invocation budget exceeded for service '" + service + "' (inv_max " +
                std::to_string(budget) + ")") {}
};

class cycle_error : public error {
public:
    using error::error;
};

}  // namespace cardmed
