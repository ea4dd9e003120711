#include "tstg/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "tstg/error.hpp"

namespace tstg {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Expressions

namespace {

class ExprParser {
public:
  explicit ExprParser(const std::string &s) : s_(s) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size())
      fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw std::invalid_argument("cannot evaluate \"" + s_ + "\": " + msg);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }

  double term() {
    double v = factor();
    for (;;) {
      if (eat('*'))
        v *= factor();
      else if (eat('/'))
        v /= factor();
      else
        return v;
    }
  }

  double factor() {
    if (eat('-'))
      return -factor();
    if (eat('+'))
      return factor();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')'))
        fail("missing ')'");
      return v;
    }
    skip();
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t end = pos_;
      while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end])))
        ++end;
      const std::string name = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (name == "pi")
        return std::numbers::pi;
      if (name == "sqrt") {
        if (!eat('('))
          fail("expected '(' after sqrt");
        const double v = expr();
        if (!eat(')'))
          fail("missing ')'");
        return std::sqrt(v);
      }
      fail("unknown name '" + name + "'");
    }
    const char *begin = s_.c_str() + pos_;
    char *end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin)
      fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string &s_;
  std::size_t pos_ = 0;
};

} // namespace

double eval_expression(const std::string &text) {
  return ExprParser(text).parse();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
public:
  explicit Reader(const std::string &text) : text_(text) {}

  // Best-effort line of the last key in a dotted path: the keys are searched
  // for in order, each after the previous one.
  int line_of(const std::string &path) const {
    std::size_t pos = 0;
    bool found = false;
    std::stringstream ss(path);
    std::string tok;
    while (std::getline(ss, tok, '.')) {
      const auto br = tok.find('[');
      if (br != std::string::npos)
        tok = tok.substr(0, br);
      if (tok.empty())
        continue;
      const auto at = text_.find("\"" + tok + "\"", pos);
      if (at == std::string::npos)
        break;
      pos = at;
      found = true;
    }
    if (!found)
      return 0;
    int line = 1;
    for (std::size_t i = 0; i < pos && i < text_.size(); ++i)
      if (text_[i] == '\n')
        ++line;
    return line;
  }

  [[noreturn]] void fail(const std::string &path, const std::string &msg) const {
    throw ConfigError(path, line_of(path), msg);
  }

  void keys(const json &j, const std::string &path, const std::set<std::string> &allowed) const {
    if (!j.is_object())
      fail(path, "expected an object");
    for (const auto &[k, v] : j.items())
      if (!allowed.count(k))
        fail(join(path, k), "unknown key");
  }

  static std::string join(const std::string &a, const std::string &b) {
    return a.empty() ? b : a + "." + b;
  }

  double number(const json &j, const std::string &path) const {
    double v;
    if (j.is_number()) {
      v = j.get<double>();
    } else if (j.is_string()) {
      try {
        v = eval_expression(j.get<std::string>());
      } catch (const std::invalid_argument &e) {
        fail(path, e.what());
      }
    } else {
      fail(path, "expected a number or numeric expression string");
    }
    if (!std::isfinite(v))
      fail(path, "value is not finite");
    return v;
  }

  long long integer(const json &j, const std::string &path) const {
    const double v = number(j, path);
    if (std::floor(v) != v || std::abs(v) > 9e15)
      fail(path, "expected an integer");
    return static_cast<long long>(v);
  }

  std::string string(const json &j, const std::string &path) const {
    if (!j.is_string())
      fail(path, "expected a string");
    return j.get<std::string>();
  }

  bool boolean(const json &j, const std::string &path) const {
    if (!j.is_boolean())
      fail(path, "expected true or false");
    return j.get<bool>();
  }

  cplx complex(const json &j, const std::string &path) const {
    if (j.is_array() && j.size() == 2)
      return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    fail(path, "expected [re, im]");
  }

  Interval interval(const json &j, const std::string &path) const {
    if (!j.is_array() || j.size() != 2)
      fail(path, "expected [lower, upper]");
    Interval out{number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    return out;
  }

  std::vector<double> numbers(const json &j, const std::string &path) const {
    if (!j.is_array())
      fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  std::vector<int> integers(const json &j, const std::string &path) const {
    if (!j.is_array())
      fail(path, "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(static_cast<int>(integer(j[i], path + "[" + std::to_string(i) + "]")));
    return out;
  }

  // Either one [lo, hi] pair (d = 1) or a list of pairs.
  std::vector<Interval> intervals(const json &j, const std::string &path) const {
    if (j.is_array() && j.size() == 2 && !j[0].is_array())
      return {interval(j, path)};
    if (!j.is_array() || j.empty())
      fail(path, "expected [lower, upper] or a list of such pairs");
    std::vector<Interval> out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(interval(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

private:
  const std::string &text_;
};

void parse_into(RunConfig &c, const json &root, const Reader &r) {
  r.keys(root, "",
         {"experiment", "epsilon", "frame", "potential", "propagator", "initial", "observables",
          "reference", "output", "reconstruct", "convergence", "compare", "seed"});
  if (root.contains("experiment"))
    c.experiment = r.string(root["experiment"], "experiment");
  if (root.contains("epsilon"))
    c.epsilon = r.number(root["epsilon"], "epsilon");
  if (root.contains("seed")) {
    if (root["seed"].is_number_unsigned())
      c.seed = root["seed"].get<std::uint64_t>();
    else if (r.integer(root["seed"], "seed") < 0)
      r.fail("seed", "must be non-negative");
    else
      c.seed = static_cast<std::uint64_t>(r.integer(root["seed"], "seed"));
  }

  if (root.contains("frame")) {
    const json &f = root["frame"];
    r.keys(f, "frame", {"box", "counts", "width", "drop_tolerance"});
    if (f.contains("box")) {
      r.keys(f["box"], "frame.box", {"q", "p"});
      if (f["box"].contains("q"))
        c.frame.q_box = r.intervals(f["box"]["q"], "frame.box.q");
      if (f["box"].contains("p"))
        c.frame.p_box = r.intervals(f["box"]["p"], "frame.box.p");
    }
    if (f.contains("counts"))
      c.frame.counts = r.integers(f["counts"], "frame.counts");
    if (f.contains("width"))
      c.frame.width = r.complex(f["width"], "frame.width");
    if (f.contains("drop_tolerance"))
      c.frame.drop_tolerance = r.number(f["drop_tolerance"], "frame.drop_tolerance");
  }

  if (root.contains("potential")) {
    const json &p = root["potential"];
    r.keys(p, "potential", {"name", "eta", "terms"});
    if (p.contains("name"))
      c.potential.name = r.string(p["name"], "potential.name");
    if (p.contains("eta"))
      c.potential.eta = r.number(p["eta"], "potential.eta");
    if (p.contains("terms")) {
      const json &t = p["terms"];
      if (!t.is_array())
        r.fail("potential.terms", "expected a list of {coeff, powers}");
      c.potential.terms.clear();
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string path = "potential.terms[" + std::to_string(i) + "]";
        r.keys(t[i], path, {"coeff", "powers"});
        if (!t[i].contains("coeff") || !t[i].contains("powers"))
          r.fail(path, "each term needs coeff and powers");
        c.potential.terms.push_back(
            {r.number(t[i]["coeff"], path + ".coeff"), r.integers(t[i]["powers"], path + ".powers")});
      }
    }
  }

  if (root.contains("propagator")) {
    const json &p = root["propagator"];
    r.keys(p, "propagator", {"method", "integrator", "tau", "h", "n_slices"});
    if (p.contains("method"))
      c.propagator.method = r.string(p["method"], "propagator.method");
    if (p.contains("integrator"))
      c.propagator.integrator = r.string(p["integrator"], "propagator.integrator");
    if (p.contains("tau"))
      c.propagator.tau = r.number(p["tau"], "propagator.tau");
    if (p.contains("h"))
      c.propagator.h = r.number(p["h"], "propagator.h");
    if (p.contains("n_slices"))
      c.propagator.n_slices = static_cast<int>(r.integer(p["n_slices"], "propagator.n_slices"));
  }

  if (root.contains("initial")) {
    const json &p = root["initial"];
    r.keys(p, "initial", {"q", "p", "width", "action"});
    auto vec = [&](const json &j, const std::string &path) {
      return j.is_array() ? r.numbers(j, path) : std::vector<double>{r.number(j, path)};
    };
    if (p.contains("q"))
      c.initial.q = vec(p["q"], "initial.q");
    if (p.contains("p"))
      c.initial.p = vec(p["p"], "initial.p");
    if (p.contains("width"))
      c.initial.width = r.complex(p["width"], "initial.width");
    if (p.contains("action"))
      c.initial.action = r.number(p["action"], "initial.action");
  }

  if (root.contains("observables")) {
    const json &o = root["observables"];
    r.keys(o, "observables", {"every", "grid_points", "boundary_tolerance", "energy", "bound"});
    if (o.contains("every"))
      c.observables.every = static_cast<int>(r.integer(o["every"], "observables.every"));
    if (o.contains("grid_points"))
      c.observables.grid_points =
          static_cast<int>(r.integer(o["grid_points"], "observables.grid_points"));
    if (o.contains("boundary_tolerance"))
      c.observables.boundary_tolerance =
          r.number(o["boundary_tolerance"], "observables.boundary_tolerance");
    if (o.contains("energy"))
      c.observables.energy = r.boolean(o["energy"], "observables.energy");
    if (o.contains("bound"))
      c.observables.bound = r.boolean(o["bound"], "observables.bound");
  }

  if (root.contains("reference")) {
    const json &o = root["reference"];
    r.keys(o, "reference", {"kind", "dt", "cache", "cache_dir"});
    if (o.contains("kind"))
      c.reference.kind = r.string(o["kind"], "reference.kind");
    if (o.contains("dt"))
      c.reference.dt = r.number(o["dt"], "reference.dt");
    if (o.contains("cache"))
      c.reference.cache = r.boolean(o["cache"], "reference.cache");
    if (o.contains("cache_dir"))
      c.reference.cache_dir = r.string(o["cache_dir"], "reference.cache_dir");
  }

  if (root.contains("output")) {
    const json &o = root["output"];
    r.keys(o, "output", {"save_tensor", "save_coefficients"});
    if (o.contains("save_tensor"))
      c.output.save_tensor = r.boolean(o["save_tensor"], "output.save_tensor");
    if (o.contains("save_coefficients"))
      c.output.save_coefficients = r.boolean(o["save_coefficients"], "output.save_coefficients");
  }

  if (root.contains("reconstruct")) {
    const json &o = root["reconstruct"];
    r.keys(o, "reconstruct", {"boxes", "points", "grid_points"});
    if (o.contains("boxes")) {
      const json &b = o["boxes"];
      if (!b.is_array() || b.empty())
        r.fail("reconstruct.boxes", "expected a list of [b_q, b_p] half widths");
      c.reconstruct.boxes.clear();
      for (std::size_t i = 0; i < b.size(); ++i)
        c.reconstruct.boxes.push_back(
            r.interval(b[i], "reconstruct.boxes[" + std::to_string(i) + "]"));
    }
    if (o.contains("points"))
      c.reconstruct.points = r.integers(o["points"], "reconstruct.points");
    if (o.contains("grid_points"))
      c.reconstruct.grid_points =
          static_cast<int>(r.integer(o["grid_points"], "reconstruct.grid_points"));
  }

  if (root.contains("convergence")) {
    const json &o = root["convergence"];
    r.keys(o, "convergence", {"sweep", "values", "t", "reference_h", "reference_points"});
    if (o.contains("sweep"))
      c.convergence.sweep = r.string(o["sweep"], "convergence.sweep");
    if (o.contains("values"))
      c.convergence.values = r.numbers(o["values"], "convergence.values");
    if (o.contains("t"))
      c.convergence.t = r.number(o["t"], "convergence.t");
    if (o.contains("reference_h"))
      c.convergence.reference_h = r.number(o["reference_h"], "convergence.reference_h");
    if (o.contains("reference_points"))
      c.convergence.reference_points =
          static_cast<int>(r.integer(o["reference_points"], "convergence.reference_points"));
  }

  if (root.contains("compare")) {
    const json &o = root["compare"];
    r.keys(o, "compare", {"reference"});
    if (o.contains("reference"))
      c.compare.reference = r.string(o["reference"], "compare.reference");
  }
}

bool one_of(const std::string &s, std::initializer_list<const char *> options) {
  for (const char *o : options)
    if (s == o)
      return true;
  return false;
}

void validate(const RunConfig &c, const Reader &r) {
  if (!one_of(c.experiment, {"reconstruct", "propagate", "reference", "compare", "convergence"}))
    r.fail("experiment", "must be one of reconstruct, propagate, reference, compare, convergence");
  if (!(c.epsilon > 0.0))
    r.fail("epsilon", "must be positive");
  const std::size_t d = c.initial.q.size();
  if (d == 0)
    r.fail("initial.q", "must not be empty");
  if (c.initial.p.size() != d)
    r.fail("initial.p", "must have the same length as initial.q");
  if (!(c.initial.width.imag() > 0.0))
    r.fail("initial.width", "imaginary part must be positive");
  if (c.frame.q_box.size() != d)
    r.fail("frame.box.q", "needs one interval per dimension");
  if (c.frame.p_box.size() != d)
    r.fail("frame.box.p", "needs one interval per dimension");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(c.frame.q_box[i][0] < c.frame.q_box[i][1]))
      r.fail("frame.box.q", "lower bound must be below upper bound");
    if (!(c.frame.p_box[i][0] < c.frame.p_box[i][1]))
      r.fail("frame.box.p", "lower bound must be below upper bound");
  }
  if (c.frame.counts.size() != 2 * d)
    r.fail("frame.counts", "needs 2d entries (q counts then p counts)");
  for (int n : c.frame.counts)
    if (n < 1)
      r.fail("frame.counts", "counts must be positive");
  if (!(c.frame.width.imag() > 0.0))
    r.fail("frame.width", "imaginary part must be positive");
  if (c.frame.drop_tolerance < 0.0)
    r.fail("frame.drop_tolerance", "must be non-negative");

  if (!one_of(c.potential.name, {"harmonic", "double_well", "free", "polynomial"}))
    r.fail("potential.name", "must be harmonic, double_well, free or polynomial");
  if (!(c.potential.eta > 0.0))
    r.fail("potential.eta", "must be positive");
  if (c.potential.name == "double_well" && d != 1)
    r.fail("potential.name", "double_well is one-dimensional");
  if (c.potential.name == "polynomial") {
    if (c.potential.terms.empty())
      r.fail("potential.terms", "polynomial potential needs terms");
    for (std::size_t i = 0; i < c.potential.terms.size(); ++i) {
      const auto &t = c.potential.terms[i];
      const std::string path = "potential.terms[" + std::to_string(i) + "].powers";
      if (t.powers.size() != d)
        r.fail(path, "needs one exponent per dimension");
      for (int e : t.powers)
        if (e < 0)
          r.fail(path, "exponents must be non-negative");
    }
  }

  if (!one_of(c.propagator.method, {"variational", "nonvariational"}))
    r.fail("propagator.method", "must be variational or nonvariational");
  if (!c.propagator.integrator.empty() &&
      !one_of(c.propagator.integrator, {"variational_splitting", "stoermer_verlet"}))
    r.fail("propagator.integrator", "must be variational_splitting or stoermer_verlet");
  if (!c.propagator.integrator.empty() &&
      (c.propagator.method == "variational") != (c.propagator.integrator == "variational_splitting"))
    r.fail("propagator.integrator",
           "variational uses variational_splitting, nonvariational uses stoermer_verlet");
  if (!(c.propagator.tau > 0.0))
    r.fail("propagator.tau", "must be positive");
  if (!(c.propagator.h > 0.0))
    r.fail("propagator.h", "must be positive");
  if (c.propagator.h > c.propagator.tau * (1.0 + 1e-12))
    r.fail("propagator.h", "must not exceed propagator.tau");
  {
    const double m = std::round(c.propagator.tau / c.propagator.h);
    if (std::abs(m * c.propagator.h - c.propagator.tau) > 1e-12 * std::max(1.0, c.propagator.tau))
      r.fail("propagator.h", "propagator.tau must be an integer multiple of h");
  }
  if (c.propagator.n_slices < 0)
    r.fail("propagator.n_slices", "must be non-negative");

  if (c.observables.every < 1)
    r.fail("observables.every", "must be positive");
  if (c.observables.grid_points < 2)
    r.fail("observables.grid_points", "must be at least 2");
  if (!(c.observables.boundary_tolerance > 0.0))
    r.fail("observables.boundary_tolerance", "must be positive");

  if (!one_of(c.reference.kind, {"auto", "analytic", "split_step", "none"}))
    r.fail("reference.kind", "must be auto, analytic, split_step or none");
  if (!(c.reference.dt > 0.0))
    r.fail("reference.dt", "must be positive");
  if (c.reference.kind == "analytic" && c.potential.name != "harmonic")
    r.fail("reference.kind", "analytic reference requires the harmonic potential");
  const bool needs_ssf = c.reference.kind == "split_step" ||
                         (c.reference.kind == "auto" && c.potential.name != "harmonic") ||
                         c.experiment == "compare";
  if (needs_ssf && (c.experiment == "propagate" || c.experiment == "reference" ||
                    c.experiment == "compare")) {
    const double m = std::round(c.propagator.tau / c.reference.dt);
    if (m < 1 || std::abs(m * c.reference.dt - c.propagator.tau) > 1e-12 * c.propagator.tau)
      r.fail("reference.dt", "propagator.tau must be an integer multiple of reference.dt");
    const int n = c.observables.grid_points;
    if ((n & (n - 1)) != 0)
      r.fail("observables.grid_points", "split-step reference needs a power of two");
  }

  for (std::size_t i = 0; i < c.reconstruct.boxes.size(); ++i)
    if (!(c.reconstruct.boxes[i][0] > 0.0) || !(c.reconstruct.boxes[i][1] > 0.0))
      r.fail("reconstruct.boxes[" + std::to_string(i) + "]", "half widths must be positive");
  for (int k : c.reconstruct.points)
    if (k < 1)
      r.fail("reconstruct.points", "point counts must be positive");
  if (c.reconstruct.grid_points < 2)
    r.fail("reconstruct.grid_points", "must be at least 2");

  if (!one_of(c.convergence.sweep, {"h", "epsilon"}))
    r.fail("convergence.sweep", "must be h or epsilon");
  if (c.convergence.values.empty())
    r.fail("convergence.values", "must not be empty");
  for (double v : c.convergence.values)
    if (!(v > 0.0))
      r.fail("convergence.values", "values must be positive");
  if (!(c.convergence.t > 0.0))
    r.fail("convergence.t", "must be positive");
  if (c.convergence.reference_h < 0.0)
    r.fail("convergence.reference_h", "must be non-negative");
  if (c.convergence.reference_points < 0)
    r.fail("convergence.reference_points", "must be non-negative");

  if (!one_of(c.compare.reference, {"split_step", "self"}))
    r.fail("compare.reference", "must be split_step or self");
}

RunConfig parse(const std::string &text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error &e) {
    int line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n')
        ++line;
    throw ConfigError("", line, std::string("malformed JSON: ") + e.what());
  }
  const Reader r(text);
  RunConfig c;
  parse_into(c, root, r);
  validate(c, r);
  return c;
}

} // namespace

void validate_config(const RunConfig &cfg) {
  const std::string none;
  validate(cfg, Reader(none));
}

RunConfig load_config_string(const std::string &text) {
  return parse(text);
}

RunConfig load_config_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string to_json(const RunConfig &c) {
  auto cx = [](cplx z) { return json::array({z.real(), z.imag()}); };
  auto ivs = [](const std::vector<Interval> &v) {
    json a = json::array();
    for (const auto &i : v)
      a.push_back(json::array({i[0], i[1]}));
    return a;
  };
  json terms = json::array();
  for (const auto &t : c.potential.terms)
    terms.push_back({{"coeff", t.coeff}, {"powers", t.powers}});
  json j = {
      {"experiment", c.experiment},
      {"epsilon", c.epsilon},
      {"seed", c.seed},
      {"frame",
       {{"box", {{"q", ivs(c.frame.q_box)}, {"p", ivs(c.frame.p_box)}}},
        {"counts", c.frame.counts},
        {"width", cx(c.frame.width)},
        {"drop_tolerance", c.frame.drop_tolerance}}},
      {"potential", {{"name", c.potential.name}, {"eta", c.potential.eta}, {"terms", terms}}},
      {"propagator",
       {{"method", c.propagator.method},
        {"integrator", c.make_propagator().integrator == Integrator::variational_splitting
                           ? "variational_splitting"
                           : "stoermer_verlet"},
        {"tau", c.propagator.tau},
        {"h", c.propagator.h},
        {"n_slices", c.propagator.n_slices}}},
      {"initial",
       {{"q", c.initial.q}, {"p", c.initial.p}, {"width", cx(c.initial.width)},
        {"action", c.initial.action}}},
      {"observables",
       {{"every", c.observables.every},
        {"grid_points", c.observables.grid_points},
        {"boundary_tolerance", c.observables.boundary_tolerance},
        {"energy", c.observables.energy},
        {"bound", c.observables.bound}}},
      {"reference",
       {{"kind", c.reference.kind},
        {"dt", c.reference.dt},
        {"cache", c.reference.cache},
        {"cache_dir", c.reference.cache_dir}}},
      {"output",
       {{"save_tensor", c.output.save_tensor}, {"save_coefficients", c.output.save_coefficients}}},
      {"reconstruct",
       {{"boxes", ivs(c.reconstruct.boxes)},
        {"points", c.reconstruct.points},
        {"grid_points", c.reconstruct.grid_points}}},
      {"convergence",
       {{"sweep", c.convergence.sweep},
        {"values", c.convergence.values},
        {"t", c.convergence.t},
        {"reference_h", c.convergence.reference_h},
        {"reference_points", c.convergence.reference_points}}},
      {"compare", {{"reference", c.compare.reference}}},
  };
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Derived objects

Potential RunConfig::make_potential() const {
  const int d = dim();
  if (potential.name == "harmonic")
    return Potential::harmonic(d);
  if (potential.name == "double_well")
    return Potential::double_well(potential.eta);
  if (potential.name == "free")
    return Potential::free(d);
  return Potential(Polynomial(d, potential.terms), "polynomial");
}

PropagatorConfig RunConfig::make_propagator() const {
  PropagatorConfig p;
  p.method = propagator.method == "nonvariational" ? Method::nonvariational : Method::variational;
  p.integrator = p.method == Method::variational ? Integrator::variational_splitting
                                                 : Integrator::stoermer_verlet;
  p.tau = propagator.tau;
  p.h = propagator.h;
  return p;
}

FrameSpec RunConfig::make_frame() const {
  const int d = dim();
  RVec q0(d), p0(d);
  std::vector<double> half(2 * d);
  for (int i = 0; i < d; ++i) {
    q0(i) = 0.5 * (frame.q_box[i][0] + frame.q_box[i][1]);
    p0(i) = 0.5 * (frame.p_box[i][0] + frame.p_box[i][1]);
    half[i] = 0.5 * (frame.q_box[i][1] - frame.q_box[i][0]);
    half[d + i] = 0.5 * (frame.p_box[i][1] - frame.p_box[i][0]);
  }
  return FrameSpec(epsilon, SiegelMatrix::scalar(frame.width, d), {q0, p0}, half, frame.counts);
}

GaussianWavePacket RunConfig::make_initial() const {
  const int d = dim();
  RVec q = Eigen::Map<const RVec>(initial.q.data(), d);
  RVec p = Eigen::Map<const RVec>(initial.p.data(), d);
  return GaussianWavePacket(epsilon, {q, p}, SiegelMatrix::scalar(initial.width, d),
                            initial.action);
}

SpatialGrid RunConfig::make_grid() const {
  const int d = dim();
  std::vector<double> lo(d), hi(d);
  std::vector<int> n(d, observables.grid_points);
  for (int i = 0; i < d; ++i) {
    lo[i] = frame.q_box[i][0];
    hi[i] = frame.q_box[i][1];
  }
  return SpatialGrid(lo, hi, n, true);
}

} // namespace tstg
