#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kinproj {

// Symmetric discrete velocity set {±(2j-1)/(2p), j = 1..p} carrying the
// uniform weight 1/(2p). Velocities are stored in the fixed order
// (v_p, ..., v_1, -v_1, ..., -v_p); every per-velocity vector in this
// codebase uses the same order, so index k here matches index k everywhere.
//
// Immutable after build(); safe to share across threads.
class VelocitySpace {
public:
    static VelocitySpace build(int p) {
        if (p < 1)
            throw std::invalid_argument("velocity space requires p >= 1, got " +
                                        std::to_string(p));
        VelocitySpace vs;
        vs.p_ = p;
        vs.velocities_.resize(2 * static_cast<std::size_t>(p));
        for (int j = 1; j <= p; ++j) {
            const double v = (2.0 * j - 1.0) / (2.0 * p);
            vs.velocities_[p - j] = v;       // v_p first, v_1 at index p-1
            vs.velocities_[p + j - 1] = -v;  // -v_1 at index p, -v_p last
        }
        vs.weight_ = 1.0 / (2.0 * p);
        // Moments come from summation over the stored set; the closed forms
        // are used as cross-checks in the tests, not here.
        double sum_sq = 0.0, sum_abs = 0.0;
        for (double v : vs.velocities_) {
            sum_sq += v * v;
            sum_abs += std::abs(v);
        }
        vs.second_moment_ = vs.weight_ * sum_sq;
        vs.abs_mean_ = vs.weight_ * sum_abs;
        vs.v_max_ = vs.velocities_.front();
        return vs;
    }

    int p() const { return p_; }
    int size() const { return 2 * p_; }
    std::span<const double> velocities() const { return velocities_; }
    double velocity(int k) const { return velocities_[static_cast<std::size_t>(k)]; }
    double weight() const { return weight_; }

    double second_moment() const { return second_moment_; }  // <v^2>
    double abs_mean() const { return abs_mean_; }            // <|v|>
    double v_max() const { return v_max_; }                  // largest velocity

    // <g> = (1/2p) sum_k g_k over the stored velocity order.
    double moment(std::span<const double> g) const {
        if (g.size() != velocities_.size())
            throw std::invalid_argument(
                "moment: vector length " + std::to_string(g.size()) +
                " does not match velocity count " + std::to_string(velocities_.size()));
        double s = 0.0;
        for (double x : g) s += x;
        return weight_ * s;
    }

private:
    VelocitySpace() = default;

    int p_ = 0;
    std::vector<double> velocities_;
    double weight_ = 0.0;
    double second_moment_ = 0.0;
    double abs_mean_ = 0.0;
    double v_max_ = 0.0;
};

// Extension point for velocity measures other than the discrete symmetric
// set (continuous interval, Gaussian). Downstream code only ever consumes
// moments, so alternative measures plug in here; no quadrature is shipped.
class VelocityMoments {
public:
    virtual ~VelocityMoments() = default;
    virtual double mass() const = 0;           // <1>
    virtual double second_moment() const = 0;  // <v^2>
    virtual double abs_mean() const = 0;       // <|v|>
    virtual double v_max() const = 0;          // sup |v|
};

class DiscreteVelocityMoments final : public VelocityMoments {
public:
    explicit DiscreteVelocityMoments(const VelocitySpace& vs) : vs_(&vs) {}
    double mass() const override { return 1.0; }
    double second_moment() const override { return vs_->second_moment(); }
    double abs_mean() const override { return vs_->abs_mean(); }
    double v_max() const override { return vs_->v_max(); }

private:
    const VelocitySpace* vs_;
};

} // namespace kinproj
