#ifndef CAUSAL_SYNTHGEN_HPP
#define CAUSAL_SYNTHGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "causal/errors.hpp"

namespace causal::synthgen {

/// One autoregressive regime: y_t ~ N(a y_{t-1} + b x_{t-1}, psi_y^2),
/// x_t ~ N(mu_x, psi_x^2). psi values are standard deviations.
struct RegimeParams {
    double a = 0.0;
    double b = 0.0;
    double mu_x = 0.0;
    double psi_x = 1.0;
    double psi_y = 1.0;
};

struct Exp1Params {
    std::vector<RegimeParams> regimes;
    long samples_per_cluster = 1000;
    void validate() const;
};

struct Exp2Params {
    RegimeParams causal;       // active for causal_begin < t < causal_end
    double mu_y = 0.0;         // non-causal y mean
    double psi_yr = 1.3;       // non-causal y standard deviation
    long total_samples = 3000;
    long causal_begin = 1300;  // strict bounds, as printed
    long causal_end = 1700;
    void validate() const;
};

struct LabeledSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<int> truth;
};

/// Three causal regimes of 1000 samples each (Table-1 defaults).
Exp1Params default_exp1_params();

/// One causal window inside an i.i.d. background.
Exp2Params default_exp2_params();

LabeledSeries gen_exp1(const Exp1Params& params, std::uint64_t seed);
LabeledSeries gen_exp2(const Exp2Params& params, std::uint64_t seed);

/// CSV with header t,x,y,truth_label; floats printed with 17 significant digits.
std::string to_csv(const LabeledSeries& series);
LabeledSeries from_csv(const std::string& text);

}  // namespace causal::synthgen

#endif
