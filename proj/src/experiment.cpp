#include "fpi/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fpi/diagnostics.hpp"
#include "fpi/error.hpp"

namespace fpi {

bool RunSummary::all_passed() const {
  return std::all_of(checks_passed.begin(), checks_passed.end(),
                     [](const auto& kv) { return kv.second; });
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return kExitParse;
    case ErrorCode::ValidationError:
    case ErrorCode::BadSet:
    case ErrorCode::BadOperator:
    case ErrorCode::BadSchedule:
    case ErrorCode::EmptySchedule:
    case ErrorCode::DimMismatch:
    case ErrorCode::InitOutsideDomain:
    case ErrorCode::AnchorOutsideDomain: return kExitValidation;
    case ErrorCode::WriteError:
    case ErrorCode::ReadError: return kExitIo;
    default: return kExitCheckFailed;
  }
}

void emit_trace_csv(const IterationTrace& trace, const std::filesystem::path& path) {
  if (trace.iterates.empty()) throw Error(ErrorCode::EmptyTrace, "nothing to write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::WriteError, "cannot open '" + path.string() + "'");
  const std::size_t dim = trace.iterates.front().dim();
  out << "n,alpha,residual,step_norm";
  for (std::size_t i = 0; i < dim; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
    out << n << ',';
    if (n > 0) out << format_real(trace.alphas_used[n - 1]);
    out << ',' << format_real(trace.residuals[n]) << ',';
    if (n > 0) out << format_real(distance(trace.iterates[n], trace.iterates[n - 1]));
    for (double c : trace.iterates[n].coords()) out << ',' << format_real(c);
    out << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::WriteError, "write to '" + path.string() + "' failed");
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_real(const std::string& s, std::size_t row) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ReadError, "bad number '" + s + "' in row " + std::to_string(row));
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t row) {
  if (s.empty()) return std::nullopt;
  return parse_real(s, row);
}

}  // namespace

CsvTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ReadError, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ReadError, "missing header");
  const auto header = split_csv(line);
  if (header.size() < 5 || header[0] != "n" || header[1] != "alpha" || header[2] != "residual" ||
      header[3] != "step_norm") {
    throw Error(ErrorCode::ReadError, "unexpected header");
  }
  const std::size_t dim = header.size() - 4;
  CsvTrace t;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw Error(ErrorCode::ReadError, "row " + std::to_string(row) + " has wrong width");
    if (parse_real(f[0], row) != static_cast<double>(row)) throw Error(ErrorCode::ReadError, "row index out of order");
    t.alphas.push_back(parse_optional(f[1], row));
    t.residuals.push_back(parse_real(f[2], row));
    t.step_norms.push_back(parse_optional(f[3], row));
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = parse_real(f[4 + i], row);
    t.iterates.emplace_back(std::move(x));
    ++row;
  }
  return t;
}

std::string render_summary(const RunSummary& s) {
  std::ostringstream out;
  out << "name = \"" << s.name << "\"\n";
  out << "method = " << to_string(s.method) << "\n";
  out << "stop_reason = " << to_string(s.stop_reason) << "\n";
  out << "iterations_used = " << s.iterations_used << "\n";
  out << "final_residual = " << format_real(s.final_residual) << "\n";
  if (s.limit_error) out << "limit_error = " << format_real(*s.limit_error) << "\n";
  for (const auto& [check, ok] : s.checks_passed) {
    out << "check." << check << " = " << (ok ? "pass" : "fail") << "\n";
  }
  out << "expect = " << (s.expect_pass ? "pass" : "fail") << "\n";
  for (const auto& note : s.notes) out << "# " << note << "\n";
  return out.str();
}

namespace {

std::vector<Vec> sample_anchors(const ConvexSet& solution, const Operator& op, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> anchors;
  for (int i = 0; i < 16 && anchors.size() < 4; ++i) {
    Vec y = sample_member(solution, rng, 2.0);
    if (residual(op, y) <= 1e-9) anchors.push_back(std::move(y));
  }
  return anchors;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::WriteError, "cannot open '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::WriteError, "write to '" + path.string() + "' failed");
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Operator op = build_operator(cfg);
  const ConvexSet domain = build_domain(cfg);
  const Schedule schedule = cfg.schedule.value_or(Schedule::one_over_n_plus_k(2));

  auto run_from = [&](const Vec& x0) {
    switch (cfg.method) {
      case Method::Picard: return run_picard(op, x0, cfg.max_iter, cfg.stop_residual);
      case Method::KM:
        return run_km(KMConfig{op, domain, x0, schedule, cfg.max_iter, cfg.stop_residual});
      case Method::Halpern:
        return run_halpern(HalpernConfig{op, domain, x0, *cfg.u, schedule, cfg.max_iter, cfg.stop_step});
    }
    throw Error(ErrorCode::ValidationError, "method: unknown");
  };
  const IterationTrace trace = run_from(cfg.x0);

  std::filesystem::path dir = std::filesystem::path(cfg.output_dir) / cfg.name;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::WriteError, "cannot create '" + dir.string() + "': " + ec.message());

  RunSummary s;
  s.name = cfg.name;
  s.method = cfg.method;
  s.stop_reason = trace.stop_reason;
  s.iterations_used = trace.steps();
  s.final_residual = trace.residuals.back();
  s.expect_pass = cfg.expect_pass;
  s.trace_path = dir / "trace.csv";
  s.summary_path = dir / "summary.txt";

  const std::size_t tail =
      std::min(trace.iterates.size(), cfg.tail.value_or(std::max<std::size_t>(1, trace.iterates.size() / 10)));
  const auto solution = known_solution_set(cfg);
  const std::vector<Vec> anchors =
      !cfg.anchors.empty() ? cfg.anchors
                           : (solution ? sample_anchors(*solution, op, cfg.seed) : std::vector<Vec>{});

  // Reference limit: P_C u for Halpern, otherwise the final iterate pulled
  // onto the known solution set when there is one.
  std::optional<Vec> candidate;
  if (cfg.method == Method::Halpern) {
    if (solution) candidate = project(*solution, *cfg.u);
  } else {
    candidate = solution ? project(*solution, trace.final_iterate()) : trace.final_iterate();
  }
  bool candidate_valid = false;
  if (candidate) {
    s.limit_error = distance(trace.final_iterate(), *candidate);
    candidate_valid = residual(op, *candidate) <= 1e-6 && contains(domain, *candidate, 1e-6);
  }

  for (const auto& [check, tol] : cfg.checks) {
    bool ok = false;
    bool noted = false;
    try {
      if (check == "fejer") {
        ok = check_fejer(trace, anchors, tol).holds;
      } else if (check == "fejer_bounded") {
        const FejerReport rep = check_fejer(trace, anchors, tol);
        ok = rep.holds;
        if (ok) check_fejer_bounded(rep, trace, tol);
      } else if (check == "key_inequality") {
        if (anchors.empty()) throw Error(ErrorCode::NoAnchors, "no anchors");
        ok = std::all_of(anchors.begin(), anchors.end(), [&](const Vec& y) {
          return check_km_key_inequality(trace, y, tol).holds;
        });
      } else if (check == "residual_to_zero") {
        ok = check_residual_to_zero(trace, tail, tol);
      } else if (check == "limit") {
        ok = candidate && candidate_valid && identify_limit(trace, *candidate, tail, tol);
      } else if (check == "weak_limit") {
        ok = candidate && candidate_valid &&
             check_weak_convergence(trace.iterates, *candidate,
                                    default_test_vectors(cfg.dim, cfg.seed), tail, tol)
                 .converged;
      } else if (check == "coupling") {
        const IterationTrace other = run_from(*cfg.coupling_x0);
        emit_trace_csv(other, dir / "coupled_trace.csv");
        ok = check_halpern_coupling(trace, other, schedule, tol).holds;
      } else if (check == "exp_bound") {
        ok = check_halpern_exp_bound(trace, *candidate, schedule, cfg.exp_eps, tol).holds;
      } else if (check == "domain_invariance") {
        ok = check_domain_invariance(trace, domain, tol);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::WriteError) throw;
      s.notes.push_back(check + ": " + e.what());
      noted = true;
      ok = false;
    }
    if (!ok && !noted) s.notes.push_back(check + ": failed");
    s.checks_passed[check] = ok;
  }

  emit_trace_csv(trace, s.trace_path);
  write_text(s.summary_path, render_summary(s));
  return s;
}

const std::vector<std::string>& demo_names() {
  static const std::vector<std::string> names{"km-rotation", "km-feasibility", "halpern-projection",
                                              "picard-failure"};
  return names;
}

std::string demo_config_text(const std::string& name) {
  if (name == "km-rotation") {
    return R"(# KM with alpha = 1/2 on a quarter turn; Fix T = {0}.
name = km-rotation
dim = 2
method = km
x0 = [1, 0]
max_iter = 200
stop_residual = 1e-12

[operator]
kind = rotation
theta = 1.5707963267948966
plane = [0, 1]

[schedule]
family = constant
alpha = 0.5

[checks]
fejer = 1e-10
fejer_bounded = 1e-10
key_inequality = 1e-10
residual_to_zero = 1e-6
limit = 1e-5
weak_limit = 1e-5
domain_invariance = 1e-7
)";
  }
  if (name == "km-feasibility") {
    return R"(# Averaged alternating projections onto a ball and a halfspace.
name = km-feasibility
dim = 3
method = km
x0 = [2, 2, 1]
anchors = [[0, 0, 0], [0.5, 0, 0], [0, 0, 0.9], [-0.5, -0.5, 0.2]]
max_iter = 20000
stop_residual = 1e-12

[set.B]
kind = ball
center = [0, 0, 0]
radius = 1

[set.H]
kind = halfspace
normal = [1, 1, 0]
offset = 0.5

[operator]
kind = compose

[operator.first]
kind = projection
set = H

[operator.second]
kind = projection
set = B

[schedule]
family = constant
alpha = 0.5

[checks]
fejer = 1e-10
key_inequality = 1e-10
residual_to_zero = 1e-6
limit = 1e-5
)";
  }
  if (name == "halpern-projection") {
    return R"(# Halpern anchored at u = x0 with T = P_B; the limit is P_B u.
name = halpern-projection
dim = 2
method = halpern
x0 = [2, 1]
u = [2, 1]
coupling_x0 = [-3, 0.5]
max_iter = 10000
stop_step = 0
tail = 10
exp_eps = 1e-2

[set.B]
kind = ball
center = [0, 0]
radius = 1

[operator]
kind = projection
set = B

[schedule]
family = one_over_n_plus_k
k = 2

[checks]
coupling = 1e-9
exp_bound = 1e-9
limit = 1e-3
residual_to_zero = 1e-3
)";
  }
  if (name == "picard-failure") {
    return R"(# Picard on T = -I oscillates between x0 and -x0; residual_to_zero fails.
name = picard-failure
dim = 2
method = picard
x0 = [1, 0]
max_iter = 10
expect = fail

[operator]
kind = neg_identity

[checks]
fejer = 1e-10
residual_to_zero = 1e-6
)";
  }
  throw Error(ErrorCode::ValidationError, "demo: unknown demo '" + name + "'");
}

}  // namespace fpi
