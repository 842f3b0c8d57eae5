#include "fdhom/cell_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fdhom {

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::F_G0: return "f,g0";
    case PairKind::FINF_G: return "finf,g";
    case PairKind::FINF_G0: return "finf,g0";
    case PairKind::F_G: return "f,g";
  }
  return "?";
}

DerivedPair DerivedPair::from(const VolumeIntegrand& f, const SurfaceIntegrand& g) {
  return DerivedPair{f, g, recession(f, default_recession_schedule()), derivative_at_zero(g, default_derivative_schedule())};
}

VolumeIntegrand DerivedPair::volume(PairKind kind) const {
  return kind == PairKind::F_G0 || kind == PairKind::F_G ? f : f_inf;
}

SurfaceIntegrand DerivedPair::surface(PairKind kind) const {
  return kind == PairKind::FINF_G || kind == PairKind::F_G ? g : g0;
}

CellProblem::CellProblem(PairKind kind, VolumeIntegrand v, SurfaceIntegrand s, GridDomain d, Datum w,
                         BoundaryMode mode)
    : pair_kind(kind), volume(std::move(v)), surface(std::move(s)), domain(std::move(d)), datum(std::move(w)),
      bc_mode(mode) {
  if (volume.n() != domain.dim() || surface.n() != domain.dim())
    throw PreconditionError("cell problem: integrand and domain dimensions differ");
  if (volume.m() != surface.m()) throw PreconditionError("cell problem: integrands disagree on m");
  if (bc_mode == BoundaryMode::perpendicular_only && !std::holds_alternative<LinearDatum>(datum))
    throw PreconditionError("cell problem: partial boundary condition needs a linear datum");
}

CellMask CellProblem::pinned_mask() const {
  return bc_mode == BoundaryMode::full ? domain.strip_mask() : domain.perpendicular_strip_mask();
}

DiscreteField CellProblem::datum_field() const {
  if (const auto* lin = std::get_if<LinearDatum>(&datum)) return linear_field(lin->xi, domain, lin->origin);
  const auto& step = std::get<StepDatum>(datum);
  return step_field(step.x0, step.zeta, step.nu, domain);
}

CellProblem make_cell_problem(PairKind kind, const DerivedPair& pair, GridDomain domain, Datum datum,
                              BoundaryMode bc_mode) {
  return CellProblem(kind, pair.volume(kind), pair.surface(kind), std::move(domain), std::move(datum), bc_mode);
}

// ------------------------------------------------------------- quantization

namespace {

Quantization aligned_grid(double anchor, double spacing, double lo_value, double hi_value) {
  const auto lo = static_cast<long>(std::floor((lo_value - anchor) / spacing + 1e-9)) - 2;
  auto hi = static_cast<long>(std::ceil((hi_value - anchor) / spacing - 1e-9)) + 2;
  if ((hi - lo) % 2 != 0) ++hi;
  Quantization q;
  q.levels = static_cast<int>(hi - lo + 1);
  q.span = spacing * static_cast<double>(hi - lo);
  q.center = anchor + spacing * static_cast<double>(lo + hi) / 2.0;
  return q;
}

}  // namespace

Quantization default_quantization(const CellProblem& p, int refinement) {
  if (refinement < 1) throw PreconditionError("quantization: refinement must be >= 1");
  if (p.volume.m() != 1) throw PreconditionError("quantization: scalar fields only");
  const DiscreteField w = p.datum_field();
  const double lo_value = w.values.minCoeff();
  const double hi_value = w.values.maxCoeff();

  if (const auto* lin = std::get_if<LinearDatum>(&p.datum)) {
    double step = 0.0;
    for (int d = 0; d < p.domain.dim(); ++d) {
      const double s = std::abs((lin->xi * p.domain.axes().col(d))(0));
      if (s > 1e-300 && (step == 0.0 || s < step)) step = s;
    }
    if (step == 0.0) return aligned_grid(w.values(0, 0), p.domain.h(), lo_value, hi_value);
    for (int q = refinement; q >= 1; --q) {
      Quantization grid = aligned_grid(w.values(0, 0), step / q, lo_value, hi_value);
      if (grid.levels <= 2001 || q == 1) return grid;
    }
  }
  const auto& step = std::get<StepDatum>(p.datum);
  const double amplitude = step.zeta.norm();
  if (amplitude == 0.0) return aligned_grid(0.0, p.domain.h(), 0.0, 0.0);
  return aligned_grid(0.0, amplitude / (8.0 * refinement), lo_value, hi_value);
}

namespace {

std::vector<double> grid_values(const Quantization& q, double center) {
  std::vector<double> v(q.levels);
  const double s = q.spacing();
  const int mid = (q.levels - 1) / 2;
  for (int k = 0; k < q.levels; ++k) v[k] = center + (k - mid) * s;
  return v;
}

double datum_center(const DiscreteField& w, const CellMask& pinned) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int c = 0; c < w.cell_count(); ++c)
    if (pinned[c]) {
      lo = std::min(lo, w.values(0, c));
      hi = std::max(hi, w.values(0, c));
    }
  return std::isfinite(lo) ? 0.5 * (lo + hi) : 0.0;
}

void check_quantization(const Quantization& q) {
  if (q.levels < 5 || q.levels % 2 == 0) throw PreconditionError("quantization: levels must be odd and >= 5");
  if (!(q.span > 0.0)) throw PreconditionError("quantization: span must be positive");
}

void check_span(const DiscreteField& w, const CellMask& pinned, const std::vector<double>& grid) {
  const double slack = 1e-9 * (grid.back() - grid.front());
  for (int c = 0; c < w.cell_count(); ++c)
    if (pinned[c] && (w.values(0, c) < grid.front() - slack || w.values(0, c) > grid.back() + slack))
      throw QuantizationError("quantization span does not contain the datum on the pinned cells");
}

// Minimises sum_i cost(i, a_i, a_{i+1}) over chains with counts[c] candidates in cell c.
// Ties go to the lower candidate index.
template <class Cost>
double chain_dp(const std::vector<int>& counts, Cost&& cost, std::vector<int>& choice) {
  const int n = static_cast<int>(counts.size());
  std::vector<std::vector<double>> best(n);
  std::vector<std::vector<int>> from(n);
  best[0].assign(counts[0], 0.0);
  for (int c = 1; c < n; ++c) {
    best[c].assign(counts[c], std::numeric_limits<double>::infinity());
    from[c].assign(counts[c], 0);
    for (int b = 0; b < counts[c]; ++b) {
      double top = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int a = 0; a < counts[c - 1]; ++a) {
        const double v = best[c - 1][a] + cost(c - 1, a, b);
        if (v < top) {
          top = v;
          arg = a;
        }
      }
      best[c][b] = top;
      from[c][b] = arg;
    }
  }
  choice.assign(n, 0);
  double top = std::numeric_limits<double>::infinity();
  for (int b = 0; b < counts[n - 1]; ++b)
    if (best[n - 1][b] < top) {
      top = best[n - 1][b];
      choice[n - 1] = b;
    }
  for (int c = n - 1; c > 0; --c) choice[c - 1] = from[c][choice[c]];
  return top;
}

struct ChainCosts {
  // per face: either fixed (both ends pinned), per level of the free end, or by level difference
  enum Kind { fixed, lower_free, upper_free, both_free };
  std::vector<Kind> kind;
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<std::uint8_t>> jump;
};

// Costs of the faces of a chain of cells (consecutive entries of `cells`, joined by `faces`).
ChainCosts chain_costs(const CellProblem& p, const std::vector<FaceInfo>& table, const std::vector<int>& cells,
                       const std::vector<int>& faces, const CellMask& pinned, const DiscreteField& w,
                       const std::vector<double>& grid, double spacing) {
  const int n = p.domain.dim();
  const double h = p.domain.h();
  const int L = static_cast<int>(grid.size());
  ChainCosts cc;
  cc.kind.resize(faces.size());
  cc.cost.resize(faces.size());
  cc.jump.resize(faces.size());
  auto eval = [&](std::size_t i, double delta, std::vector<double>& cost, std::vector<std::uint8_t>& jump) {
    const FaceCost fc = face_costs(p.volume, p.surface, table[faces[i]], scalar_vector(delta), h, n);
    const bool j = fc.jump < fc.bulk;
    cost.push_back(j ? fc.jump : fc.bulk);
    jump.push_back(j);
  };
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const int a = cells[i], b = cells[i + 1];
    const bool pa = pinned[a], pb = pinned[b];
    if (pa && pb) {
      cc.kind[i] = ChainCosts::fixed;
      const FaceCost fc = face_costs(p.volume, p.surface, table[faces[i]],
                                     scalar_vector(w.values(0, b) - w.values(0, a)), h, n);
      const bool j = w.jumps[faces[i]] != 0;
      cc.cost[i].push_back(j ? fc.jump : fc.bulk);
      cc.jump[i].push_back(j);
    } else if (pa) {
      cc.kind[i] = ChainCosts::upper_free;
      for (int k = 0; k < L; ++k) eval(i, grid[k] - w.values(0, a), cc.cost[i], cc.jump[i]);
    } else if (pb) {
      cc.kind[i] = ChainCosts::lower_free;
      for (int k = 0; k < L; ++k) eval(i, w.values(0, b) - grid[k], cc.cost[i], cc.jump[i]);
    } else {
      cc.kind[i] = ChainCosts::both_free;
      for (int d = -(L - 1); d <= L - 1; ++d) eval(i, d * spacing, cc.cost[i], cc.jump[i]);
    }
  }
  return cc;
}

// Exact quantized minimisation along one chain; writes values and jump flags into u.
double solve_chain(const CellProblem& p, const std::vector<FaceInfo>& table, const std::vector<int>& cells,
                   const std::vector<int>& faces, const CellMask& pinned, const DiscreteField& w,
                   const std::vector<double>& grid, double spacing, DiscreteField& u) {
  const int L = static_cast<int>(grid.size());
  const ChainCosts cc = chain_costs(p, table, cells, faces, pinned, w, grid, spacing);
  std::vector<int> counts(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) counts[c] = pinned[cells[c]] ? 1 : L;
  auto index = [&](std::size_t i, int a, int b) -> int {
    switch (cc.kind[i]) {
      case ChainCosts::fixed: return 0;
      case ChainCosts::upper_free: return b;
      case ChainCosts::lower_free: return a;
      case ChainCosts::both_free: return b - a + L - 1;
    }
    return 0;
  };
  std::vector<int> choice;
  const double value = chain_dp(counts, [&](int i, int a, int b) { return cc.cost[i][index(i, a, b)]; }, choice);
  for (std::size_t c = 0; c < cells.size(); ++c)
    u.values(0, cells[c]) = pinned[cells[c]] ? w.values(0, cells[c]) : grid[choice[c]];
  for (std::size_t i = 0; i < faces.size(); ++i) u.jumps[faces[i]] = cc.jump[i][index(i, choice[i], choice[i + 1])];
  return value;
}

}  // namespace

SolveResult solve_exact_1d(const CellProblem& p, const Quantization& quant) {
  if (p.domain.dim() != 1 || p.volume.m() != 1) throw PreconditionError("solve_exact_1d: scalar 1D problems only");
  check_quantization(quant);
  if (quant.levels > 2001) throw PreconditionError("solve_exact_1d: at most 2001 levels");
  const CellMask pinned = p.pinned_mask();
  const DiscreteField w = p.datum_field();
  const auto grid = grid_values(quant, quant.center.value_or(datum_center(w, pinned)));
  check_span(w, pinned, grid);
  const auto table = face_table(p.domain);

  const int N = p.domain.cell_count();
  std::vector<int> cells(N), faces(N - 1);
  for (int c = 0; c < N; ++c) cells[c] = c;
  for (int i = 0; i + 1 < N; ++i) faces[i] = p.domain.face_id(0, i);

  SolveResult result;
  result.argmin = w;
  result.value = solve_chain(p, table, cells, faces, pinned, w, grid, quant.spacing(), result.argmin);
  result.exact = true;
  result.method = "dp";
  return result;
}

// ------------------------------------------------------------------ oracle

double oracle_count(const CellProblem& p, const Quantization& quant) {
  const CellMask pinned = p.pinned_mask();
  double count = 1.0;
  for (int c = 0; c < p.domain.cell_count(); ++c)
    if (!pinned[c]) count *= quant.levels;
  for (int id = 0; id < p.domain.interior_face_count(); ++id) {
    const Face f = p.domain.face(id);
    if (!(pinned[f.cell] && pinned[p.domain.upper_cell(f)])) count *= 2.0;
  }
  return count;
}

SolveResult brute_force_oracle(const CellProblem& p, const Quantization& quant, const OracleLimits& limits) {
  if (p.volume.m() != 1) throw PreconditionError("oracle: scalar problems only");
  check_quantization(quant);
  const CellMask pinned = p.pinned_mask();
  const double count = oracle_count(p, quant);
  int free_cells = 0;
  for (auto v : pinned) free_cells += !v;
  const bool too_large = quant.levels > limits.max_levels || count > limits.max_count ||
                         (p.domain.dim() == 1 && p.domain.cell_count() > limits.max_cells_1d) ||
                         (p.domain.dim() >= 2 && free_cells > limits.max_free_cells_2d);
  if (too_large) throw OracleLimitError("oracle: instance exceeds the enumeration limits", count);

  const DiscreteField w = p.datum_field();
  const auto grid = grid_values(quant, quant.center.value_or(datum_center(w, pinned)));
  check_span(w, pinned, grid);
  const auto table = face_table(p.domain);
  const int n = p.domain.dim();

  std::vector<int> free_list;
  for (int c = 0; c < p.domain.cell_count(); ++c)
    if (!pinned[c]) free_list.push_back(c);
  std::vector<int> toggle;
  for (int id = 0; id < static_cast<int>(table.size()); ++id)
    if (!(pinned[table[id].lower] && pinned[table[id].upper])) toggle.push_back(id);

  DiscreteField u = w;
  DiscreteField best = w;
  double best_value = std::numeric_limits<double>::infinity();
  const double lone = lone_axis_energy(p.volume, p.domain);
  std::vector<int> level(free_list.size(), 0);
  std::vector<FaceCost> costs(table.size());
  for (;;) {
    for (std::size_t i = 0; i < free_list.size(); ++i) u.values(0, free_list[i]) = grid[level[i]];
    for (std::size_t id = 0; id < table.size(); ++id)
      costs[id] = face_costs(p.volume, p.surface, table[id], u.values.col(table[id].upper) - u.values.col(table[id].lower),
                             p.domain.h(), n);
    double fixed_part = lone;
    for (std::size_t id = 0; id < table.size(); ++id)
      if (pinned[table[id].lower] && pinned[table[id].upper]) fixed_part += w.jumps[id] ? costs[id].jump : costs[id].bulk;
    const std::uint64_t subsets = std::uint64_t{1} << toggle.size();
    for (std::uint64_t s = 0; s < subsets; ++s) {
      double total = fixed_part;
      for (std::size_t t = 0; t < toggle.size(); ++t)
        total += (s >> t) & 1 ? costs[toggle[t]].jump : costs[toggle[t]].bulk;
      if (total < best_value) {
        best_value = total;
        best = u;
        for (std::size_t t = 0; t < toggle.size(); ++t) best.jumps[toggle[t]] = (s >> t) & 1;
      }
    }
    std::size_t i = 0;
    while (i < level.size() && ++level[i] == quant.levels) level[i++] = 0;
    if (i == level.size()) break;
  }
  SolveResult result;
  result.argmin = best;
  result.value = energy(p.volume, p.surface, best);
  result.exact = true;
  result.iterations = static_cast<int>(std::min(count, 2e9));
  result.method = "enumeration";
  return result;
}

// --------------------------------------------------------------- heuristic

namespace {

class DescentState {
 public:
  DescentState(const CellProblem& p, const std::vector<FaceInfo>& table, const CellMask& pinned,
               const std::vector<double>& grid)
      : p_(p), table_(table), pinned_(pinned), grid_(grid), incident_(p.domain.cell_count()) {
    for (int id = 0; id < static_cast<int>(table.size()); ++id) {
      incident_[table[id].lower].push_back(id);
      incident_[table[id].upper].push_back(id);
    }
  }

  DiscreteField u;

  double face_cost(int id, bool toggleable_min) {
    const FaceInfo& face = table_[id];
    const FaceCost fc = face_costs(p_.volume, p_.surface, face, u.values.col(face.upper) - u.values.col(face.lower),
                                   p_.domain.h(), p_.domain.dim());
    if (toggleable_min && toggleable(id)) {
      last_jump_ = fc.jump < fc.bulk;
      return std::min(fc.jump, fc.bulk);
    }
    last_jump_ = u.jumps[id] != 0;
    return u.jumps[id] ? fc.jump : fc.bulk;
  }

  bool toggleable(int id) const { return !(pinned_[table_[id].lower] && pinned_[table_[id].upper]); }

  double local(int cell, double value) {
    const double saved = u.values(0, cell);
    u.values(0, cell) = value;
    double total = 0.0;
    for (int id : incident_[cell]) total += face_cost(id, true);
    u.values(0, cell) = saved;
    return total;
  }

  // Moves one free cell to its best level; returns the decrease.
  double move(int cell) {
    const int L = static_cast<int>(grid_.size());
    const double current = local(cell, u.values(0, cell));
    const int stride = std::max(1, L / 16);
    int best_k = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int k = 0; k < L; k += stride) {
      const double v = local(cell, grid_[k]);
      if (v < best_v) {
        best_v = v;
        best_k = k;
      }
    }
    // integer golden-section refinement inside the bracket around the coarse winner
    int lo = std::max(0, best_k - stride), hi = std::min(L - 1, best_k + stride);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    while (hi - lo > 3) {
      const int m1 = hi - static_cast<int>(std::round(phi * (hi - lo)));
      const int m2 = lo + static_cast<int>(std::round(phi * (hi - lo)));
      if (local(cell, grid_[m1]) <= local(cell, grid_[m2]))
        hi = m2;
      else
        lo = m1;
    }
    for (int k = lo; k <= hi; ++k) {
      const double v = local(cell, grid_[k]);
      if (v < best_v) {
        best_v = v;
        best_k = k;
      }
    }
    if (best_v < current - 1e-14 * std::max(1.0, std::abs(current))) {
      u.values(0, cell) = grid_[best_k];
      for (int id : incident_[cell]) {
        face_cost(id, true);
        if (toggleable(id)) u.jumps[id] = last_jump_;
      }
      return current - best_v;
    }
    return 0.0;
  }

  // Flips every toggleable face whose energy drops; returns the total decrease.
  double toggle_pass() {
    double gain = 0.0;
    for (int id = 0; id < static_cast<int>(table_.size()); ++id) {
      if (!toggleable(id)) continue;
      const double keep = face_cost(id, false);
      u.jumps[id] = !u.jumps[id];
      const double flip = face_cost(id, false);
      if (flip < keep - 1e-14 * std::max(1.0, keep))
        gain += keep - flip;
      else
        u.jumps[id] = !u.jumps[id];
    }
    return gain;
  }

 private:
  const CellProblem& p_;
  const std::vector<FaceInfo>& table_;
  const CellMask& pinned_;
  const std::vector<double>& grid_;
  std::vector<std::vector<int>> incident_;
  bool last_jump_ = false;
};

}  // namespace

SolveResult solve_heuristic(const CellProblem& p, const HeuristicSchedule& schedule, std::optional<Quantization> quant) {
  const int n = p.domain.dim();
  if (n < 1 || n > 2 || p.volume.m() != 1) throw PreconditionError("solve_heuristic: scalar problems with n in {1, 2}");
  const Quantization q = quant.value_or(default_quantization(p));
  check_quantization(q);
  const CellMask pinned = p.pinned_mask();
  const DiscreteField w = p.datum_field();
  const auto grid = grid_values(q, q.center.value_or(datum_center(w, pinned)));
  const auto table = face_table(p.domain);
  const int L = static_cast<int>(grid.size());
  std::mt19937_64 rng(schedule.seed);

  std::vector<int> free_cells;
  for (int c = 0; c < p.domain.cell_count(); ++c)
    if (!pinned[c]) free_cells.push_back(c);

  auto nearest_level = [&](double v) {
    const double k = std::round((v - grid.front()) / q.spacing());
    return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(L - 1)));
  };

  std::vector<DiscreteField> starts;
  starts.push_back(w);
  if (n >= 2 && schedule.line_init) {
    // exact chains along the last axis, ignoring the coupling across the other axes
    DiscreteField line = w;
    const int last = n - 1;
    for (int c = 0; c < p.domain.cell_count(); ++c) {
      if (p.domain.multi_index(c)[last] != 0) continue;
      std::vector<int> cells{c}, faces;
      for (int k = 1; k < p.domain.count(last); ++k) {
        faces.push_back(p.domain.face_id(last, cells.back()));
        cells.push_back(p.domain.neighbour(cells.back(), last, +1));
      }
      solve_chain(p, table, cells, faces, pinned, w, grid, q.spacing(), line);
    }
    starts.push_back(line);
  }
  for (int r = 0; r < schedule.restarts; ++r) {
    DiscreteField start = w;
    std::uniform_int_distribution<int> jitter(-static_cast<int>(schedule.temperature * L),
                                              static_cast<int>(schedule.temperature * L));
    for (int c : free_cells) start.values(0, c) = grid[std::clamp(nearest_level(w.values(0, c)) + jitter(rng), 0, L - 1)];
    for (std::size_t id = 0; id < table.size(); ++id)
      if (!(pinned[table[id].lower] && pinned[table[id].upper])) start.jumps[id] = 0;
    starts.push_back(start);
  }

  SolveResult result;
  result.value = std::numeric_limits<double>::infinity();
  result.exact = false;
  result.method = "descent";
  DescentState state(p, table, pinned, grid);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    state.u = starts[s];
    int sweeps = 0;
    for (; sweeps < schedule.sweeps; ++sweeps) {
      double gain = 0.0;
      for (int c : free_cells) gain += state.move(c);
      gain += state.toggle_pass();
      if (gain <= 0.0) break;
    }
    result.iterations += sweeps;
    const double value = energy(p.volume, p.surface, state.u);
    if (value < result.value) {
      result.value = value;
      result.argmin = state.u;
    }
  }
  result.restarts = static_cast<int>(starts.size());
  return result;
}

DiscreteField truncate(const DiscreteField& u, const DiscreteField& datum, const CellMask& pinned, double M) {
  if (!(M > 0.0)) throw PreconditionError("truncate: M must be positive");
  for (int c = 0; c < u.cell_count(); ++c)
    if (pinned[c] && datum.values.col(c).cwiseAbs().maxCoeff() > 0.5 * M)
      throw PreconditionError("truncate: datum exceeds M/2 on the pinned cells");
  DiscreteField out = u;
  for (int c = 0; c < u.cell_count(); ++c) {
    if (pinned[c])
      out.values.col(c) = datum.values.col(c);
    else
      out.values.col(c) = u.values.col(c).cwiseMax(-M).cwiseMin(M);
  }
  return out;
}

}  // namespace fdhom
