#include "mwetag/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace mwetag {

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Matrix& x, double h) {
  Tensor param = Tensor::parameter(x);
  Tensor params[] = {param};
  return grad_check([&] { return f(param); }, params, h);
}

double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> params, double h) {
  for (Tensor& p : params) p.zero_grad();
  loss().backward();
  double worst = 0.0;
  for (Tensor& p : params) {
    const Matrix analytic = p.grad();
    Matrix& value = p.value_mut();
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double saved = value.data()[i];
      double plus = 0.0;
      double minus = 0.0;
      {
        NoGradGuard no_grad;
        value.data()[i] = saved + h;
        plus = loss().item();
        value.data()[i] = saved - h;
        minus = loss().item();
      }
      value.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic.data()[i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
    p.zero_grad();
  }
  return worst;
}

}  // namespace mwetag
