#pragma once

#include <cmath>

namespace abp {

/// Error-free transformation a + b = s + e (Knuth TwoSum).
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

/// Running sum carrying its rounding error alongside (Sum2 accumulation).
class CompensatedSum {
public:
    CompensatedSum& operator+=(double v) {
        double e;
        two_sum(sum_, v, sum_, e);
        err_ += e;
        return *this;
    }

    double value() const { return sum_ + err_; }

private:
    double sum_ = 0.0;
    double err_ = 0.0;
};

}  // namespace abp
