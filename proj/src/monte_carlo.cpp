#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "abp/compensated.hpp"
#include "abp/errors.hpp"
#include "abp/kernels.hpp"
#include "abp/oracles.hpp"

namespace abp::oracles {
namespace {

constexpr std::size_t kLanes = 256;
// exp(-40) ~ 4e-18: bridge crossings less likely than this are not sampled.
constexpr double kBridgeCutoff = 40.0;

using Engine = std::mt19937_64;
using Normal = boost::random::normal_distribution<double>;

// The engine's state refresh vectorizes well; the AVX2 copy inlines
// everything so no out-of-line template code is built with AVX2 enabled.
void fill_normal_scalar(Engine& rng, Normal& normal, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal(rng);
}

#if ABP_WITH_AVX2
__attribute__((target("avx2,fma"), flatten)) void fill_normal_avx2(Engine& rng, Normal& normal,
                                                                 double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = normal(rng);
}
#endif

using FillNormal = void (*)(Engine&, Normal&, double*, std::size_t);

FillNormal select_fill_normal() {
#if ABP_WITH_AVX2
    if (kernels::active_backend() == kernels::Backend::avx2) return fill_normal_avx2;
#endif
    return fill_normal_scalar;
}

struct StreamResult {
    CompensatedSum sum;
    CompensatedSum sum_sq;
    long count = 0;
    long left = 0;
    long right = 0;
};

class Stream {
public:
    Stream(const ModelParams& p, const McConfig& mc, int index)
        : p_(p),
          dt_(mc.dt_mc),
          noise_scale_(std::sqrt(2.0 * mc.dt_mc)),
          flip_(-std::expm1(-p.beta * mc.dt_mc)) {
        std::seed_seq seq{static_cast<std::uint32_t>(mc.seed), static_cast<std::uint32_t>(mc.seed >> 32),
                          static_cast<std::uint32_t>(index)};
        rng_.seed(seq);
    }

    StreamResult run(long particles) {
        StreamResult out;
        if (std::abs(p_.x0) >= 1.0) {
            // Started on an absorbing end: exits at t = 0.
            out.count = particles;
            (p_.x0 > 0.0 ? out.right : out.left) = particles;
            for (long i = 0; i < particles; ++i) {
                out.sum += 0.0;
                out.sum_sq += 0.0;
            }
            return out;
        }
        long launched = 0;
        std::size_t active = 0;
        while (active < kLanes && launched < particles) {
            launch(active++);
            ++launched;
        }
        const double near = kBridgeCutoff * dt_;
        while (active > 0) {
            ++step_;
            fill_normal_(rng_, normal_, noise_.data(), active);
            std::copy_n(x_.begin(), active, prev_.begin());
            kernels::advance_positions({x_.data(), active}, {drift_.data(), active},
                                       {noise_.data(), active}, noise_scale_);
            for (std::size_t i = 0; i < active;) {
                double exit_time = -1.0;
                int side = 0;
                const double xp = prev_[i], xn = x_[i];
                const double elapsed = static_cast<double>(step_ - start_[i]);
                if (xn >= 1.0 || xn <= -1.0) {
                    const double b = xn >= 1.0 ? 1.0 : -1.0;
                    const double frac = (b - xp) / (xn - xp);
                    exit_time = (elapsed - 1.0 + frac) * dt_;
                    side = xn >= 1.0 ? 1 : -1;
                } else {
                    const double gu = (1.0 - xp) * (1.0 - xn);
                    const double gl = (1.0 + xp) * (1.0 + xn);
                    if (gu < near || gl < near) {
                        const double pu = std::exp(-gu / dt_), pl = std::exp(-gl / dt_);
                        const double u = uniform_(rng_);
                        if (u < pu + pl) {
                            side = u < pu ? 1 : -1;
                            exit_time = (elapsed - 0.5) * dt_;
                        }
                    }
                }
                if (side != 0) {
                    out.sum += exit_time;
                    out.sum_sq += exit_time * exit_time;
                    ++out.count;
                    (side > 0 ? out.right : out.left) += 1;
                    if (launched < particles) {
                        launch(i);
                        ++launched;
                        ++i;
                    } else {
                        --active;
                        move_lane(active, i);  // re-examine slot i next
                    }
                    continue;
                }
                if (flip_at_[i] == step_) {
                    drift_[i] = -drift_[i];
                    flip_at_[i] = step_ + next_flip();
                }
                ++i;
            }
        }
        return out;
    }

private:
    long next_flip() { return 1 + geometric_(rng_); }

    void launch(std::size_t lane) {
        const double sigma = uniform_(rng_) < p_.eta ? 1.0 : -1.0;
        x_[lane] = p_.x0;
        drift_[lane] = sigma * p_.pe * dt_;
        start_[lane] = step_;
        flip_at_[lane] = step_ + next_flip();
    }

    void move_lane(std::size_t from, std::size_t to) {
        if (from == to) return;
        x_[to] = x_[from];
        prev_[to] = prev_[from];
        drift_[to] = drift_[from];
        start_[to] = start_[from];
        flip_at_[to] = flip_at_[from];
        // Noise already consumed for this step; the moved lane is re-checked
        // with its own positions.
    }

    ModelParams p_;
    double dt_;
    double noise_scale_;
    double flip_;
    Engine rng_;
    Normal normal_{0.0, 1.0};
    FillNormal fill_normal_ = select_fill_normal();
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::geometric_distribution<long> geometric_{flip_};
    std::vector<double> x_ = std::vector<double>(kLanes);
    std::vector<double> prev_ = std::vector<double>(kLanes);
    std::vector<double> drift_ = std::vector<double>(kLanes);
    std::vector<double> noise_ = std::vector<double>(kLanes);
    long step_ = 0;  // steps taken by this stream
    std::vector<long> start_ = std::vector<long>(kLanes);    // step_ at launch
    std::vector<long> flip_at_ = std::vector<long>(kLanes);  // step_ of the next flip
};

}  // namespace

void validate(const McConfig& mc) {
    if (mc.n_particles < 1) throw ValidationError("n_particles", "must be >= 1");
    if (!(mc.dt_mc > 0.0) || !std::isfinite(mc.dt_mc)) throw ValidationError("dt_mc", "must be > 0");
    if (mc.streams < 1) throw ValidationError("streams", "must be >= 1");
    if (mc.threads < 1) throw ValidationError("threads", "must be >= 1");
}

McEstimate mfpt_mc(const ModelParams& params, const McConfig& mc) {
    validate(params);
    validate(mc);
    const int streams = static_cast<int>(std::min<long>(mc.streams, mc.n_particles));
    std::vector<StreamResult> results(streams);
    auto share = [&](int s) {
        const long base = mc.n_particles / streams, extra = mc.n_particles % streams;
        return base + (s < extra ? 1 : 0);
    };
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int s = next++; s < streams; s = next++) results[s] = Stream(params, mc, s).run(share(s));
    };
    const int threads = std::min(mc.threads, streams);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    CompensatedSum sum, sum_sq;
    McEstimate est;
    long count = 0;
    for (const auto& r : results) {
        sum += r.sum.value();
        sum_sq += r.sum_sq.value();
        count += r.count;
        est.n_escaped_left += r.left;
        est.n_escaped_right += r.right;
    }
    const double n = static_cast<double>(count);
    est.mean_fpt = sum.value() / n;
    if (count > 1) {
        const double var = std::max(0.0, (sum_sq.value() - n * est.mean_fpt * est.mean_fpt) / (n - 1.0));
        est.std_err = std::sqrt(var / n);
    }
    return est;
}

}  // namespace abp::oracles
