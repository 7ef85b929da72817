#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace foct {

// Numerical failure inside an integration or a finite-difference routine.
// Carries the grid node at which the failure was detected (-1 if not tied
// to a particular node).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string msg, long node = -1)
        : std::runtime_error(std::move(msg)), node_(node) {}

    [[nodiscard]] long node() const noexcept { return node_; }

private:
    long node_;
};

// Uniform time grid on [t0, tf] with n_steps intervals, all times in days.
// Nodes are always recomputed as t0 + i*h so that a node is bit-identical
// no matter where it is evaluated.
struct TimeGrid {
    double t0 = 0.0;
    double tf = 0.0;
    std::size_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double t0_, double tf_, std::size_t n)
        : t0(t0_), tf(tf_), n_steps(n) {
        if (!(tf > t0))
            throw std::invalid_argument("TimeGrid: tf must exceed t0");
        if (n_steps < 1)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    [[nodiscard]] double h() const { return (tf - t0) / static_cast<double>(n_steps); }
    [[nodiscard]] double node(std::size_t i) const { return t0 + static_cast<double>(i) * h(); }
    [[nodiscard]] std::size_t n_nodes() const { return n_steps + 1; }

    friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
        return a.t0 == b.t0 && a.tf == b.tf && a.n_steps == b.n_steps;
    }
};

// Piecewise-constant derivative order alpha(t). Each segment runs from the
// previous segment's end (or the grid start) up to and including end_time.
struct OrderSegment {
    double end_time = 0.0;  // days
    double order = 1.0;     // in (0, 1]
};

struct OrderSchedule {
    std::vector<OrderSegment> segments;

    OrderSchedule() = default;
    explicit OrderSchedule(std::vector<OrderSegment> segs) : segments(std::move(segs)) {
        if (segments.empty())
            throw std::invalid_argument("OrderSchedule: at least one segment required");
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& s : segments) {
            if (!(s.order > 0.0) || s.order > 1.0)
                throw std::invalid_argument("OrderSchedule: order must lie in (0, 1]");
            if (!(s.end_time > prev))
                throw std::invalid_argument("OrderSchedule: end times must be strictly increasing");
            prev = s.end_time;
        }
    }

    static OrderSchedule constant(double alpha, double tf) {
        return OrderSchedule({{tf, alpha}});
    }

    // Two-branch schedule: order alpha0 on [t0, t_prime], order 1 afterwards.
    static OrderSchedule switched(double alpha0, double t_prime, double tf) {
        if (!(t_prime < tf))
            return constant(alpha0, tf);
        return OrderSchedule({{t_prime, alpha0}, {tf, 1.0}});
    }

    [[nodiscard]] bool is_constant() const { return segments.size() == 1; }

    [[nodiscard]] double order_at(double t) const {
        for (const auto& s : segments)
            if (t <= s.end_time + 1e-12 * std::max(1.0, std::abs(s.end_time)))
                return s.order;
        return segments.back().order;
    }

    // Checks that the final end time matches tf and that every breakpoint
    // lies on a node of `grid`. Throws std::invalid_argument otherwise.
    void validate_against(const TimeGrid& grid) const;

    // Schedule seen from the reversed clock tau = tf - t; segment ends map to
    // tf - start and the segment order ordering flips.
    [[nodiscard]] OrderSchedule reversed(const TimeGrid& grid) const;
};

// Dense solution record: one d-dimensional state per grid node, stored
// row-major in a single buffer.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(TimeGrid grid, std::size_t dim)
        : grid_(grid), dim_(dim), data_(grid.n_nodes() * dim, 0.0) {}

    [[nodiscard]] const TimeGrid& grid() const { return grid_; }
    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t n_nodes() const { return grid_.n_nodes(); }

    [[nodiscard]] std::span<double> at(std::size_t node) {
        return {data_.data() + node * dim_, dim_};
    }
    [[nodiscard]] std::span<const double> at(std::size_t node) const {
        return {data_.data() + node * dim_, dim_};
    }

    [[nodiscard]] double operator()(std::size_t node, std::size_t comp) const {
        return data_[node * dim_ + comp];
    }
    [[nodiscard]] double& operator()(std::size_t node, std::size_t comp) {
        return data_[node * dim_ + comp];
    }

    // One compartment over all nodes, as a fresh vector.
    [[nodiscard]] std::vector<double> component(std::size_t comp) const {
        std::vector<double> out(n_nodes());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, comp);
        return out;
    }

    [[nodiscard]] const std::vector<double>& raw() const { return data_; }
    [[nodiscard]] std::vector<double>& raw() { return data_; }

private:
    TimeGrid grid_;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// Right-hand side contract: writes f(t, y) into dydt. Must be deterministic
// and free of side effects; dydt has the same dimension as y.
using RhsFunction =
    std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

}  // namespace foct
