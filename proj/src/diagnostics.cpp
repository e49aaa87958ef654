#include "rtig/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "rtig/error.hpp"
#include "rtig/rig.hpp"

namespace rtig {

QqData qq_data(std::span<const double> responses, const RigMixtureModel& model) {
  if (responses.empty()) throw ValidationError("empty trace");
  const Responsibilities z = e_step(responses, model);
  std::vector<std::vector<double>> stats(model.k());
  for (std::size_t j = 0; j < responses.size(); ++j) {
    const auto row = z.row(j);
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    const LevelParam lp = model.component(best);
    stats[best].push_back(chi2_stat(responses[j], lp.theta, lp.u, lp.lambda));
  }

  QqData out;
  for (std::size_t c = 0; c < model.k(); ++c) {
    auto& g = stats[c];
    if (model.weights[c] == 0.0 || g.empty()) {
      out.notes.push_back("component " + std::to_string(c) + " skipped: no observations");
      continue;
    }
    std::sort(g.begin(), g.end());
    const double count = static_cast<double>(g.size());
    for (std::size_t r = 0; r < g.size(); ++r) {
      QqPoint p;
      p.component = c;
      p.rank = r + 1;
      p.count = g.size();
      p.position = (static_cast<double>(r) + 0.5) / count;
      p.theoretical = chi2_quantile_1df(p.position);
      p.observed = g[r];
      out.points.push_back(p);
    }
  }
  return out;
}

double qq_tail_slope(const QqData& qq, std::size_t component, double from_position) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const QqPoint& p : qq.points) {
    if (p.component != component || p.position < from_position) continue;
    sx += p.theoretical;
    sy += p.observed;
    sxx += p.theoretical * p.theoretical;
    sxy += p.theoretical * p.observed;
    ++m;
  }
  if (m < 2) throw ValidationError("too few tail points for a slope");
  const double mm = static_cast<double>(m);
  return (sxy - sx * sy / mm) / (sxx - sx * sx / mm);
}

double l2_distance(std::span<const double> responses, const RigMixtureModel& model) {
  if (responses.empty()) throw ValidationError("empty trace");
  validate_model(model);
  std::vector<double> xs(responses.begin(), responses.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < xs.size();) {
    std::size_t end = j;
    while (end < xs.size() && xs[end] == xs[j]) ++end;
    const double fn = static_cast<double>(end) / n;
    const double d = fn - model.cdf(xs[j]);
    acc += d * d * static_cast<double>(end - j);
    j = end;
  }
  return std::sqrt(acc / n);
}

}  // namespace rtig
