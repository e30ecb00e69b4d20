#include "protocol_io.hpp"

#include "symqkd/optimize.hpp"
#include "symqkd/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace symqkd;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kVerifyFailed = 3 };

struct Selector {
  std::string scheme;
  std::string qubit;
  std::string protocol_file;
  std::string group;
  std::string u;
  int n = 3;
  double theta = std::numbers::pi / 2;
};

struct Output {
  std::string format = "text";
  std::string path;
};

void add_selector(CLI::App* cmd, Selector& sel, bool custom) {
  auto* scheme = cmd->add_option("--scheme", sel.scheme, "MUB scheme: 2, d+1 or d")
                     ->check(CLI::IsMember({"2", "d+1", "d"}));
  auto* qubit = cmd->add_option("--qubit", sel.qubit, "qubit protocol: sixstate, bb84, cube, icosahedron, "
                                                      "dodecahedron, ngon, cuboid");
  qubit->excludes(scheme);
  cmd->add_option("--n", sel.n, "polygon order for ngon")->check(CLI::Range(2, 64));
  cmd->add_option("--theta", sel.theta, "cuboid angle in radians");
  if (custom) {
    auto* proto = cmd->add_option("--protocol", sel.protocol_file, "protocol definition (JSON)")
                      ->check(CLI::ExistingFile);
    proto->excludes(scheme)->excludes(qubit);
    cmd->add_option("--group", sel.group, "symmetry group for --protocol: octahedral, icosahedral, "
                                          "icosahedral-dual, dihedral, cuboid, pauli");
    cmd->add_option("--u", sel.u, "Bell weights u(r,s), row-major, for --protocol");
  }
}

void add_output(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "text, csv or json")->check(CLI::IsMember({"text", "csv", "json"}));
  cmd->add_option("--out", out.path, "write to this file instead of stdout");
}

std::string fmt12(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

nlohmann::json num_or_null(double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); }

double param(const RatePoint& p, const std::string& name) {
  for (const auto& [k, v] : p.params)
    if (k == name) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

struct Row {
  std::string scheme;
  int d = 2;
  RatePoint point;
  std::string method;
};

const char* kCsvHeader = "scheme,d,Q,rate,a,b,c,status";

std::string csv_row(const Row& r) {
  std::string status = r.point.status;
  for (char& c : status)
    if (c == ',' || c == '\n') c = ';';
  return r.scheme + "," + std::to_string(r.d) + "," + fmt12(r.point.q) + "," + fmt12(r.point.rate) + "," +
         fmt12(param(r.point, "a")) + "," + fmt12(param(r.point, "b")) + "," + fmt12(param(r.point, "c")) + "," +
         status;
}

nlohmann::json json_row(const Row& r) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.point.params) params[k] = v;
  nlohmann::json j{{"scheme", r.scheme}, {"d", r.d},           {"q", r.point.q},       {"rate", num_or_null(r.point.rate)},
                   {"params", params},   {"status", r.point.status}, {"method", r.method}};
  if (!std::isnan(r.point.closed_form_delta)) j["closed_form_delta"] = r.point.closed_form_delta;
  return j;
}

void emit(const Output& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out.path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write '" + out.path + "'");
  f << text;
}

std::string render(const std::vector<Row>& rows, const Output& out, bool single) {
  std::ostringstream s;
  if (out.format == "csv") {
    s << kCsvHeader << '\n';
    for (const auto& r : rows) s << csv_row(r) << '\n';
  } else if (out.format == "json") {
    if (single) {
      s << json_row(rows.front()).dump(2) << '\n';
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) arr.push_back(json_row(r));
      s << arr.dump(2) << '\n';
    }
  } else if (single) {
    const auto& r = rows.front();
    s << "protocol  " << r.scheme << " (d = " << r.d << ")\n"
      << "method    " << r.method << "\n"
      << "Q         " << fmt12(r.point.q) << "\n"
      << "rate      " << fmt12(r.point.rate) << "\n"
      << "status    " << r.point.status << "\n";
    for (const auto& [k, v] : r.point.params) s << std::left << std::setw(10) << k << fmt12(v) << "\n";
    if (!std::isnan(r.point.closed_form_delta)) s << "closed-form delta  " << fmt12(r.point.closed_form_delta) << "\n";
  } else {
    s << std::left << std::setw(16) << "scheme" << std::setw(4) << "d" << std::setw(10) << "Q" << std::setw(18)
      << "rate" << "status\n";
    for (const auto& r : rows)
      s << std::left << std::setw(16) << r.scheme << std::setw(4) << r.d << std::setw(10) << fmt12(r.point.q)
        << std::setw(18) << (std::isnan(r.point.rate) ? "-" : fmt12(r.point.rate)) << r.point.status << "\n";
  }
  return s.str();
}

struct Target {
  std::string scheme;
  int d = 2;
  std::string method;
  std::function<RatePoint(double)> point;
};

Target resolve(const Selector& sel, int d, Method method) {
  if (!sel.qubit.empty()) {
    const QubitKind kind = parse_qubit_kind(sel.qubit);
    const int n = sel.n;
    const double theta = sel.theta;
    qubit_protocol(kind, n, theta).validate();
    return {qubit_name(kind, n, theta), 2, "engine", [=](double q) { return qubit_rate(kind, q, n, theta); }};
  }
  if (!sel.protocol_file.empty()) {
    if (sel.group.empty()) throw std::invalid_argument("--protocol needs --group (or --u with rate)");
    const ProtocolSpec p = qkdrate::load_protocol(sel.protocol_file);
    const GroupRep g = point_group(sel.group, sel.group == "pauli" ? p.d : sel.n);
    return {p.name, p.d, "engine", [p, g](double q) {
              const AttackFamily f = family_from_group(p, g, q);
              const OptimizationResult r = minimize_rate(f, engine_rate(p));
              if (r.status == OptStatus::Infeasible) throw InfeasibleError(range_message(f.name, q, f.lo, f.hi));
              return point_from(f, r, q);
            }};
  }
  if (sel.scheme.empty()) throw std::invalid_argument("choose one of --scheme, --qubit or --protocol");
  const Scheme s = parse_scheme(sel.scheme);
  if (!is_prime(d)) throw std::invalid_argument("--d must be prime");
  const bool fallback = method == Method::Analytic && s == Scheme::DMubs;
  return {scheme_name(s), d, fallback ? "numeric" : method_name(method),
          [=](double q) { return scheme_rate(s, d, q, method); }};
}

int cmd_rate(const Selector& sel, int d, double q, const std::string& method, const Output& out) {
  if (!sel.protocol_file.empty() && !sel.u.empty()) {
    const ProtocolSpec p = qkdrate::load_protocol(sel.protocol_file);
    const RateReport rep = sifted_rate(qkdrate::parse_bell_table(sel.u, p.d), p);
    RatePoint pt{rep.Q, rep.r, {}, "evaluated"};
    pt.params = {{"I", rep.I}, {"chi", rep.chi}, {"F_B", rep.F_B}};
    emit(out, render({{p.name, p.d, pt, "engine"}}, out, true));
    return kOk;
  }
  const Target t = resolve(sel, d, parse_method(method));
  emit(out, render({{t.scheme, t.d, t.point(q), t.method}}, out, true));
  return kOk;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("sweep needs q-min <= q-max and q-step > 0");
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  if (n > 1000000) throw std::invalid_argument("sweep grid too large");
  for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

int cmd_sweep(const Selector& sel, const std::vector<int>& dims, double lo, double hi, double step,
              const std::string& method, unsigned threads, const Output& out) {
  const auto grid = make_grid(lo, hi, step);
  std::vector<Row> rows;
  const std::vector<int> ds = sel.scheme.empty() ? std::vector<int>{2} : dims;
  for (int d : ds) {
    const Target t = resolve(sel, d, parse_method(method));
    for (auto& p : sweep(t.point, grid, threads)) rows.push_back({t.scheme, t.d, std::move(p), t.method});
  }
  emit(out, render(rows, out, false));
  return kOk;
}

int cmd_threshold(const Selector& sel, int d, const std::string& method, const Output& out) {
  const Target t = resolve(sel, d, parse_method(method));
  const double hi = (t.d - 1.0) / t.d;
  auto curve = [&](double q) {
    const RatePoint p = t.point(q);
    if (std::isnan(p.rate)) throw InfeasibleError("rate undefined at Q = " + fmt12(q));
    return p.rate;
  };
  const double qstar = threshold_q(curve, 1e-9, hi);
  std::ostringstream s;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", qstar);
  if (out.format == "json") {
    s << nlohmann::json{{"scheme", t.scheme}, {"d", t.d}, {"threshold", qstar}, {"method", t.method}}.dump(2) << '\n';
  } else if (out.format == "csv") {
    s << "scheme,d,threshold\n" << t.scheme << ',' << t.d << ',' << buf << '\n';
  } else {
    s << buf << '\n';
  }
  emit(out, s.str());
  return kOk;
}

int cmd_verify(const std::string& suite, const Output& out) {
  const std::uint64_t seed = property_seed();
  std::vector<std::string> names;
  if (suite == "all") names = suite_names();
  else names.push_back(suite);
  std::ostringstream s;
  nlohmann::json arr = nlohmann::json::array();
  bool ok = true;
  s << "seed " << seed << '\n';
  for (const auto& name : names) {
    const SuiteResult r = run_suite(name, seed);
    ok = ok && r.ok();
    s << std::left << std::setw(10) << r.name << r.passed << " passed, " << r.failed << " failed\n";
    for (const auto& n : r.notes) s << "  " << n << '\n';
    for (const auto& f : r.failures) s << "  FAIL " << f << '\n';
    arr.push_back({{"suite", r.name}, {"passed", r.passed}, {"failed", r.failed}, {"failures", r.failures}});
  }
  if (out.format == "json")
    emit(out, nlohmann::json{{"seed", seed}, {"suites", arr}, {"ok", ok}}.dump(2) + "\n");
  else
    emit(out, s.str());
  return ok ? kOk : kVerifyFailed;
}

int cmd_commutant(const std::string& group, int n, int d, const std::string& compare, const Output& out) {
  auto build = [&](const std::string& name) { return point_group(name, name == "pauli" ? d : n); };
  const GroupRep g = build(group);
  const CommutantBasis cb = commutant_basis(g);
  nlohmann::json j{{"group", g.name}, {"order", g.order()}, {"dim", g.dim}, {"commutant_dimension", cb.size()}};
  std::ostringstream s;
  s << "group " << g.name << ", order " << g.order() << ", commutant dimension " << cb.size() << '\n';
  if (!compare.empty()) {
    const GroupRep h = build(compare);
    const bool eq = g.dim == h.dim && commutant_equal(cb, commutant_basis(h));
    j["compare"] = h.name;
    j["equal"] = eq;
    s << "commutant of " << h.name << (eq ? " equals" : " differs from") << " that of " << g.name << '\n';
  }
  emit(out, out.format == "json" ? j.dump(2) + "\n" : s.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secret key rates of symmetric QKD protocols under collective attacks"};
  app.require_subcommand(1);

  Selector sel;
  Output out;
  int d = 2;
  std::vector<int> dims{2};
  double q = 0.0;
  double q_min = 0.0, q_max = 0.15, q_step = 0.01;
  unsigned threads = 0;
  std::string method = "analytic";
  std::string suite = "all";
  std::string group, compare;
  const auto methods = CLI::IsMember({"analytic", "numeric", "engine"});

  auto* rate = app.add_subcommand("rate", "optimal rate at one error rate");
  add_selector(rate, sel, true);
  add_output(rate, out);
  rate->add_option("--d", d, "dimension (prime)");
  auto* qopt = rate->add_option("--q", q, "error rate Q")->check(CLI::Range(0.0, 1.0));
  rate->add_option("--method", method, "analytic, numeric or engine")->check(methods);

  auto* sw = app.add_subcommand("sweep", "rate over a grid of error rates");
  add_selector(sw, sel, true);
  add_output(sw, out);
  sw->add_option("--d", dims, "one or more prime dimensions")->expected(1, -1);
  sw->add_option("--q-min", q_min)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--q-max", q_max)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--q-step", q_step);
  sw->add_option("--threads", threads, "worker threads (0 = all cores)");
  sw->add_option("--method", method)->check(methods);

  auto* th = app.add_subcommand("threshold", "error rate at which the rate reaches zero");
  add_selector(th, sel, true);
  add_output(th, out);
  th->add_option("--d", d);
  th->add_option("--method", method)->check(methods);

  auto* ver = app.add_subcommand("verify", "run the built-in property suites");
  ver->add_option("--suite", suite)->check(CLI::IsMember({"all", "gpauli", "rates", "symmetry", "theorems"}));
  add_output(ver, out);

  auto* com = app.add_subcommand("commutant", "commutant of a symmetry group's twirl");
  com->add_option("--group", group)->required();
  com->add_option("--n", sel.n, "order for dihedral");
  com->add_option("--d", d, "dimension for pauli");
  com->add_option("--compare", compare, "second group to compare against");
  add_output(com, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  if (sw->parsed() && out.format == "text" && !sw->get_option("--format")->count()) out.format = "csv";

  try {
    if (rate->parsed()) {
      if (qopt->count() == 0 && sel.u.empty()) throw std::invalid_argument("rate needs --q");
      return cmd_rate(sel, d, q, method, out);
    }
    if (sw->parsed()) return cmd_sweep(sel, dims, q_min, q_max, q_step, method, threads, out);
    if (th->parsed()) return cmd_threshold(sel, d, method, out);
    if (ver->parsed()) return cmd_verify(suite, out);
    if (com->parsed()) return cmd_commutant(group, sel.n, d, compare, out);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
