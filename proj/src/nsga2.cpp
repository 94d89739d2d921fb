#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "afferentsim/optimize.hpp"
#include "afferentsim/parallel.hpp"

namespace afferentsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations, so runs reproduce across toolchains.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::mt19937_64 engine_;
};

struct Individual {
  Eigen::VectorXd genes;  // encoded (log10 where requested)
  Eigen::VectorXd objectives;
  int rank = 0;
  double crowding = 0.0;
};

Eigen::VectorXd encode_bound(const ParameterBounds& b, const Eigen::VectorXd& v) {
  Eigen::VectorXd e = v;
  for (int i = 0; i < b.size(); ++i) {
    if (b.log_scale[i]) e(i) = std::log10(v(i));
  }
  return e;
}

Eigen::VectorXd decode(const ParameterBounds& b, const Eigen::VectorXd& genes) {
  Eigen::VectorXd x = genes;
  for (int i = 0; i < b.size(); ++i) {
    if (b.log_scale[i]) x(i) = std::pow(10.0, genes(i));
    x(i) = std::clamp(x(i), b.lower(i), b.upper(i));
  }
  return x;
}

std::string echo(const Eigen::VectorXd& x) {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x(i);
  out << "]";
  return out.str();
}

void evaluate_all(const ObjectiveFunction& f, const ParameterBounds& bounds,
                  std::vector<Individual>& pop) {
  parallel_for(pop.size(), [&](std::size_t i) {
    const Eigen::VectorXd x = decode(bounds, pop[i].genes);
    Eigen::VectorXd obj;
    try {
      obj = f(x);
    } catch (const std::exception& e) {
      throw NumericalError("objective evaluation failed for candidate " + echo(x) + ": " +
                           e.what());
    }
    if (!obj.allFinite()) {
      throw NumericalError("non-finite objectives for candidate " + echo(x));
    }
    pop[i].objectives = std::move(obj);
  });
}

void assign_rank_and_crowding(std::vector<Individual>& pop) {
  std::vector<Eigen::VectorXd> objs;
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  const auto fronts = non_dominated_sort(objs);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto dist = crowding_distance(objs, fronts[r]);
    for (std::size_t i = 0; i < fronts[r].size(); ++i) {
      pop[fronts[r][i]].rank = static_cast<int>(r);
      pop[fronts[r][i]].crowding = dist[i];
    }
  }
}

bool crowded_less(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

const Individual& tournament(const std::vector<Individual>& pop, Random& rng) {
  const Individual& a = pop[rng.index(pop.size())];
  const Individual& b = pop[rng.index(pop.size())];
  if (crowded_less(a, b)) return a;
  if (crowded_less(b, a)) return b;
  return rng.uniform() < 0.5 ? a : b;
}

// Bounded simulated binary crossover.
void sbx(Eigen::VectorXd& c1, Eigen::VectorXd& c2, const Eigen::VectorXd& lo,
         const Eigen::VectorXd& hi, double eta, Random& rng) {
  for (Eigen::Index i = 0; i < c1.size(); ++i) {
    if (rng.uniform() > 0.5) continue;
    const double y1 = std::min(c1(i), c2(i));
    const double y2 = std::max(c1(i), c2(i));
    if (y2 - y1 < 1e-14) continue;
    const double u = rng.uniform();
    auto child = [&](double beta) {
      const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
      const double betaq = u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                            : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
      return betaq;
    };
    const double bq1 = child(1.0 + 2.0 * (y1 - lo(i)) / (y2 - y1));
    const double bq2 = child(1.0 + 2.0 * (hi(i) - y2) / (y2 - y1));
    double v1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo(i), hi(i));
    double v2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo(i), hi(i));
    if (rng.uniform() < 0.5) std::swap(v1, v2);
    c1(i) = v1;
    c2(i) = v2;
  }
}

void polynomial_mutation(Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         double eta, double probability, Random& rng) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (rng.uniform() >= probability) continue;
    const double range = hi(i) - lo(i);
    if (range <= 0.0) continue;
    const double d1 = (x(i) - lo(i)) / range;
    const double d2 = (hi(i) - x(i)) / range;
    const double u = rng.uniform();
    const double power = 1.0 / (eta + 1.0);
    double dq;
    if (u < 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
      dq = std::pow(v, power) - 1.0;
    } else {
      const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
      dq = 1.0 - std::pow(v, power);
    }
    x(i) = std::clamp(x(i) + dq * range, lo(i), hi(i));
  }
}

double min_sum(const std::vector<Individual>& pop) {
  double best = kInf;
  for (const auto& ind : pop) best = std::min(best, ind.objectives.sum());
  return best;
}

}  // namespace

void Nsga2Options::validate() const {
  if (population < 2) throw ValidationError("nsga2.population", "must be >= 2");
  if (budget < population) throw ValidationError("nsga2.budget", "must be >= population");
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
    throw ValidationError("nsga2.crossover_probability", "must be in [0, 1]");
  }
  if (!(eta_crossover >= 0.0)) throw ValidationError("nsga2.eta_crossover", "must be >= 0");
  if (!(eta_mutation >= 0.0)) throw ValidationError("nsga2.eta_mutation", "must be >= 0");
  if (mutation_probability > 1.0) {
    throw ValidationError("nsga2.mutation_probability", "must be <= 1");
  }
}

bool dominates(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a.array() <= b.array()).all() && (a.array() < b.array()).any();
}

std::vector<std::vector<int>> non_dominated_sort(const std::vector<Eigen::VectorXd>& objectives) {
  const int n = static_cast<int>(objectives.size());
  std::vector<std::vector<int>> dominated(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(objectives[p], objectives[q])) {
        dominated[p].push_back(q);
      } else if (dominates(objectives[q], objectives[p])) {
        ++count[p];
      }
    }
    if (count[p] == 0) fronts[0].push_back(p);
  }
  for (std::size_t i = 0; !fronts[i].empty(); ++i) {
    std::vector<int> next;
    for (int p : fronts[i]) {
      for (int q : dominated[p]) {
        if (--count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Eigen::VectorXd>& objectives,
                                      const std::vector<int>& front) {
  const std::size_t n = front.size();
  std::vector<double> dist(n, 0.0);
  if (n == 0) return dist;
  const Eigen::Index m = objectives[front[0]].size();
  std::vector<std::size_t> order(n);
  for (Eigen::Index k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return objectives[front[a]](k) < objectives[front[b]](k);
    });
    const double lo = objectives[front[order.front()]](k);
    const double hi = objectives[front[order.back()]](k);
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    if (hi - lo <= 0.0) continue;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dist[order[i]] +=
          (objectives[front[order[i + 1]]](k) - objectives[front[order[i - 1]]](k)) / (hi - lo);
    }
  }
  return dist;
}

double hypervolume_2d(const std::vector<Eigen::VectorXd>& points,
                      const Eigen::Vector2d& reference) {
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : points) {
    if (p(0) < reference(0) && p(1) < reference(1)) pts.emplace_back(p(0), p(1));
  }
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a(0) != b(0) ? a(0) < b(0) : a(1) < b(1);
  });
  double volume = 0.0;
  double ceiling = reference(1);
  for (const auto& p : pts) {
    if (p(1) >= ceiling) continue;
    volume += (reference(0) - p(0)) * (ceiling - p(1));
    ceiling = p(1);
  }
  return volume;
}

std::vector<FrontMember> ParetoFront::non_dominated() const {
  std::vector<FrontMember> out;
  for (const auto& m : members) {
    if (m.rank == 0) out.push_back(m);
  }
  return out;
}

ParetoFront nsga2(const ObjectiveFunction& evaluate, const ParameterBounds& bounds,
                  const Nsga2Options& options) {
  options.validate();
  bounds.validate();
  const int n = bounds.size();
  const Eigen::VectorXd lo = encode_bound(bounds, bounds.lower);
  const Eigen::VectorXd hi = encode_bound(bounds, bounds.upper);
  const double pm = options.mutation_probability > 0.0 ? options.mutation_probability : 1.0 / n;
  const auto size = static_cast<std::size_t>(options.population);
  Random rng(options.seed);

  ParetoFront result;
  std::vector<Individual> pop(size);
  for (auto& ind : pop) {
    ind.genes.resize(n);
    for (int i = 0; i < n; ++i) ind.genes(i) = lo(i) + rng.uniform() * (hi(i) - lo(i));
  }
  evaluate_all(evaluate, bounds, pop);
  result.evaluations = options.population;
  assign_rank_and_crowding(pop);
  double best = min_sum(pop);
  result.best_sum_history.push_back(best);

  while (result.evaluations + options.population <= options.budget) {
    std::vector<Individual> offspring;
    offspring.reserve(size + 1);
    while (offspring.size() < size) {
      Individual c1 = tournament(pop, rng);
      Individual c2 = tournament(pop, rng);
      if (rng.uniform() < options.crossover_probability) {
        sbx(c1.genes, c2.genes, lo, hi, options.eta_crossover, rng);
      }
      polynomial_mutation(c1.genes, lo, hi, options.eta_mutation, pm, rng);
      polynomial_mutation(c2.genes, lo, hi, options.eta_mutation, pm, rng);
      offspring.push_back(std::move(c1));
      offspring.push_back(std::move(c2));
    }
    offspring.resize(size);
    evaluate_all(evaluate, bounds, offspring);
    result.evaluations += options.population;
    best = std::min(best, min_sum(offspring));

    std::vector<Individual> combined = std::move(pop);
    combined.insert(combined.end(), std::make_move_iterator(offspring.begin()),
                    std::make_move_iterator(offspring.end()));
    assign_rank_and_crowding(combined);
    std::vector<std::size_t> order(combined.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return crowded_less(combined[a], combined[b]);
    });
    pop.clear();
    for (std::size_t i = 0; i < size; ++i) pop.push_back(combined[order[i]]);
    assign_rank_and_crowding(pop);
    result.best_sum_history.push_back(best);
  }

  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return crowded_less(pop[a], pop[b]); });
  for (std::size_t i : order) {
    result.members.push_back(
        {decode(bounds, pop[i].genes), pop[i].objectives, pop[i].rank, pop[i].crowding});
  }
  return result;
}

const FrontMember& select_candidate(const ParetoFront& front) {
  if (front.members.empty()) throw ValidationError("front", "empty Pareto front");
  const FrontMember* best = &front.members.front();
  auto better = [](const FrontMember& a, const FrontMember& b) {
    const double sa = a.objective_sum();
    const double sb = b.objective_sum();
    if (sa != sb) return sa < sb;
    const double ma = a.objectives.maxCoeff();
    const double mb = b.objectives.maxCoeff();
    if (ma != mb) return ma < mb;
    return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(), b.x.data(),
                                        b.x.data() + b.x.size());
  };
  for (const auto& m : front.members) {
    if (better(m, *best)) best = &m;
  }
  return *best;
}

}  // namespace afferentsim
