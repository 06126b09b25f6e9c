#pragma once

#include <yaml-cpp/yaml.h>

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tlgerm/errors.hpp"
#include "tlgerm/flux.hpp"
#include "tlgerm/fvm.hpp"
#include "tlgerm/germ.hpp"
#include "tlgerm/signal.hpp"
#include "tlgerm/tolerances.hpp"

namespace tlgerm {

enum class Model { meso, macro, two_to_one };

inline std::string model_name(Model m) {
  switch (m) {
    case Model::meso: return "meso";
    case Model::macro: return "macro";
    default: return "two-to-one";
  }
}

inline Model parse_model(const std::string& s) {
  if (s == "meso") return Model::meso;
  if (s == "macro") return Model::macro;
  if (s == "two-to-one") return Model::two_to_one;
  throw ValidationError("unknown model '" + s + "' (expected meso, macro or two-to-one)");
}

struct InitialSegment {
  int branch = 0;
  double from = 0, to = 0, rho = 0;
  bool operator==(const InitialSegment&) const = default;
};

struct GridSpec {
  double L = 4.0;
  double dx = 1.0 / 400;
  double cfl = 0.9;
  bool operator==(const GridSpec&) const = default;
};

struct RunSpec {
  Model model = Model::meso;
  double eps = 0.125;
  double T = 1.0;
  std::vector<double> snapshots;
  std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125};
  std::uint64_t seed = 1;
  bool operator==(const RunSpec&) const = default;
};

// For the two-to-one model branch 0 is the outgoing road (x > 0) and branches 1, 2 the incoming ones (x < 0).
struct Scenario {
  std::array<Flux, 3> fluxes;
  std::vector<SignalSegment> signal;
  std::vector<InitialSegment> initial;
  GridSpec grid;
  RunSpec run;
  Tolerances tol;
  std::vector<std::string> notes;  // defaults that were filled in while parsing

  FluxTriple flux_triple() const { return {fluxes}; }
  Signal build_signal() const {
    Signal s(signal);
    s.check_caps(fluxes[0].f_max(), fluxes[1].f_max(), fluxes[2].f_max());
    return s;
  }
  Orientation layout() const { return run.model == Model::two_to_one ? Orientation::converging : Orientation::diverging; }
};

namespace detail {

inline double number(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ValidationError(what + " must be a number");
  }
}

inline Flux parse_flux(const YAML::Node& n, int j) {
  std::string where = "fluxes[" + std::to_string(j) + "]";
  if (!n.IsMap() || !n["family"]) throw ValidationError(where + ": flux descriptor needs a family");
  std::string fam = n["family"].as<std::string>();
  Flux f;
  if (fam == "quadratic") {
    for (const char* k : {"a", "c", "f_max"})
      if (!n[k]) throw ValidationError(where + ": quadratic flux needs a, c and f_max");
    f = Flux::quadratic(number(n["a"], where + ".a"), number(n["c"], where + ".c"), number(n["f_max"], where + ".f_max"));
  } else if (fam == "sampled") {
    if (!n["points"] || !n["points"].IsSequence()) throw ValidationError(where + ": sampled flux needs points");
    std::vector<double> p, v;
    for (const auto& pt : n["points"]) {
      if (!pt.IsSequence() || pt.size() != 2) throw ValidationError(where + ": points must be [p, f] pairs");
      p.push_back(number(pt[0], where + ".points"));
      v.push_back(number(pt[1], where + ".points"));
    }
    f = Flux::sampled(p, v);
  } else {
    throw ValidationError(where + ": unknown flux family '" + fam + "'");
  }
  if (n["reversed"] && n["reversed"].as<bool>()) f = f.reversed();
  return f;
}

inline void emit_flux(YAML::Emitter& out, const Flux& f) {
  out << YAML::Flow << YAML::BeginMap;
  if (auto q = f.as_quadratic()) {
    out << YAML::Key << "family" << YAML::Value << "quadratic";
    out << YAML::Key << "a" << YAML::Value << q->a << YAML::Key << "c" << YAML::Value << q->c;
    out << YAML::Key << "f_max" << YAML::Value << q->fmax;
  } else {
    auto s = f.as_sampled();
    out << YAML::Key << "family" << YAML::Value << "sampled" << YAML::Key << "points" << YAML::Value << YAML::BeginSeq;
    for (std::size_t i = 0; i < s->nodes().size(); ++i)
      out << YAML::Flow << YAML::BeginSeq << s->nodes()[i] << s->values()[i] << YAML::EndSeq;
    out << YAML::EndSeq;
  }
  if (f.is_reversed()) out << YAML::Key << "reversed" << YAML::Value << true;
  out << YAML::EndMap;
}

struct TolEntry {
  const char* key;
  double Tolerances::*field;
};

inline const std::vector<TolEntry>& tolerance_keys() {
  static const std::vector<TolEntry> keys{
      {"dissipation_floor", &Tolerances::dissipation_floor},
      {"generation_member", &Tolerances::generation_member},
      {"generation_dissipation", &Tolerances::generation_dissipation},
      {"closed_form", &Tolerances::closed_form},
      {"split_identity", &Tolerances::split_identity},
      {"concave_form", &Tolerances::concave_form},
      {"order_effect", &Tolerances::order_effect},
      {"trace_membership", &Tolerances::trace_membership},
      {"trace_pass_rate", &Tolerances::trace_pass_rate},
      {"decay_factor", &Tolerances::decay_factor},
      {"fixed_point", &Tolerances::fixed_point},
      {"kato_step", &Tolerances::kato_step},
      {"homog_ratio", &Tolerances::homog_ratio},
      {"homog_relative", &Tolerances::homog_relative},
      {"transform_identity", &Tolerances::transform_identity},
      {"macro_member", &Tolerances::macro_member},
      {"bv_factor", &Tolerances::bv_factor},
      {"ledger", &Tolerances::ledger},
  };
  return keys;
}

}  // namespace detail

inline void validate_scenario(const Scenario& sc) {
  Signal s = sc.build_signal();
  if (!(sc.grid.L > 0) || !(sc.grid.dx > 0)) throw ValidationError("grid: L and dx must be positive");
  if (!(sc.grid.cfl > 0 && sc.grid.cfl <= 1)) throw ValidationError("grid: cfl must lie in (0, 1]");
  Field::zeros(sc.grid.L, sc.grid.dx);
  if (!(sc.run.T > 0)) throw ValidationError("run: horizon T must be positive");
  if (sc.run.model != Model::macro && !(sc.run.eps > 0)) throw ValidationError("run: eps must be positive");
  for (double e : sc.run.eps_list)
    if (!(e > 0)) throw ValidationError("run: every entry of eps_list must be positive");
  bool conv = sc.layout() == Orientation::converging;
  for (const auto& seg : sc.initial) {
    if (seg.branch < 0 || seg.branch > 2) throw ValidationError("initial: branch must be 0, 1 or 2");
    bool incoming = (seg.branch == 0) != conv;
    double lo = incoming ? -sc.grid.L : 0.0, hi = incoming ? 0.0 : sc.grid.L;
    if (!(seg.from < seg.to) || seg.from < lo - 1e-12 || seg.to > hi + 1e-12) {
      std::ostringstream os;
      os << "initial: segment [" << seg.from << ", " << seg.to << "] on branch " << seg.branch << " must lie in [" << lo
         << ", " << hi << "]";
      throw ValidationError(os.str());
    }
    const Flux& f = sc.fluxes[static_cast<std::size_t>(seg.branch)];
    if (seg.rho < f.a() || seg.rho > f.c()) {
      std::ostringstream os;
      os << "initial: density " << seg.rho << " on branch " << seg.branch << " outside the flux domain [" << f.a() << ", "
         << f.c() << "]";
      throw ValidationError(os.str());
    }
  }
}

inline Scenario parse_scenario_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ValidationError(std::string("scenario parse error: ") + e.what());
  }
  if (!root.IsMap()) throw ValidationError("scenario must be a mapping with fluxes, signal, initial, grid and run");
  Scenario sc;

  auto fl = root["fluxes"];
  if (!fl || !fl.IsSequence() || fl.size() != 3) throw ValidationError("fluxes: exactly three flux descriptors required");
  for (int j = 0; j < 3; ++j) sc.fluxes[static_cast<std::size_t>(j)] = detail::parse_flux(fl[static_cast<std::size_t>(j)], j);

  auto sg = root["signal"];
  if (!sg || !sg.IsSequence() || sg.size() == 0) throw ValidationError("signal: list of {duration, phase, A} required");
  for (const auto& n : sg) {
    if (!n["duration"] || !n["phase"] || !n["A"]) throw ValidationError("signal: every segment needs duration, phase and A");
    sc.signal.push_back({detail::number(n["duration"], "signal.duration"), n["phase"].as<int>(),
                         detail::number(n["A"], "signal.A")});
  }

  if (auto rn = root["run"]) {
    if (rn["model"]) sc.run.model = parse_model(rn["model"].as<std::string>());
    if (rn["eps"]) sc.run.eps = detail::number(rn["eps"], "run.eps");
    if (rn["T"]) sc.run.T = detail::number(rn["T"], "run.T");
    if (rn["seed"]) sc.run.seed = rn["seed"].as<std::uint64_t>();
    if (rn["snapshots"]) sc.run.snapshots = rn["snapshots"].as<std::vector<double>>();
    if (rn["eps_list"]) sc.run.eps_list = rn["eps_list"].as<std::vector<double>>();
  } else {
    sc.notes.push_back("run section missing: defaults applied");
  }

  if (auto gr = root["grid"]) {
    if (gr["L"]) sc.grid.L = detail::number(gr["L"], "grid.L");
    if (gr["dx"]) sc.grid.dx = detail::number(gr["dx"], "grid.dx");
    if (gr["cfl"]) sc.grid.cfl = detail::number(gr["cfl"], "grid.cfl");
  } else {
    std::ostringstream os;
    os << "grid section missing: defaults applied (L = " << sc.grid.L << ", dx = " << sc.grid.dx << ", cfl = " << sc.grid.cfl
       << ")";
    sc.notes.push_back(os.str());
  }

  if (auto in = root["initial"]) {
    for (const auto& n : in)
      sc.initial.push_back({n["branch"].as<int>(), detail::number(n["from"], "initial.from"),
                            detail::number(n["to"], "initial.to"), detail::number(n["rho"], "initial.rho")});
  } else {
    sc.notes.push_back("initial section missing: every branch starts empty");
  }

  if (auto tl = root["tolerances"]) {
    for (const auto& kv : tl) {
      std::string key = kv.first.as<std::string>();
      bool found = false;
      for (const auto& e : detail::tolerance_keys())
        if (key == e.key) {
          sc.tol.*e.field = detail::number(kv.second, "tolerances." + key);
          found = true;
        }
      if (!found) throw ValidationError("tolerances: unknown entry '" + key + "'");
    }
  }

  validate_scenario(sc);
  return sc;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

inline std::string to_yaml(const Scenario& sc) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "fluxes" << YAML::Value << YAML::BeginSeq;
  for (const auto& f : sc.fluxes) detail::emit_flux(out, f);
  out << YAML::EndSeq;
  out << YAML::Key << "signal" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : sc.signal)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "duration" << YAML::Value << s.duration << YAML::Key << "phase"
        << YAML::Value << s.phase << YAML::Key << "A" << YAML::Value << s.A << YAML::EndMap;
  out << YAML::EndSeq;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : sc.initial)
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "branch" << YAML::Value << s.branch << YAML::Key << "from"
        << YAML::Value << s.from << YAML::Key << "to" << YAML::Value << s.to << YAML::Key << "rho" << YAML::Value << s.rho
        << YAML::EndMap;
  out << YAML::EndSeq;
  out << YAML::Key << "grid" << YAML::Value << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "L" << YAML::Value << sc.grid.L << YAML::Key << "dx" << YAML::Value << sc.grid.dx;
  out << YAML::Key << "cfl" << YAML::Value << sc.grid.cfl << YAML::EndMap;
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << model_name(sc.run.model);
  out << YAML::Key << "eps" << YAML::Value << sc.run.eps << YAML::Key << "T" << YAML::Value << sc.run.T;
  out << YAML::Key << "seed" << YAML::Value << sc.run.seed;
  out << YAML::Key << "snapshots" << YAML::Value << YAML::Flow << sc.run.snapshots;
  out << YAML::Key << "eps_list" << YAML::Value << YAML::Flow << sc.run.eps_list;
  out << YAML::EndMap;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  for (const auto& e : detail::tolerance_keys()) out << YAML::Key << e.key << YAML::Value << sc.tol.*e.field;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

inline bool same_scenario(const Scenario& a, const Scenario& b) {
  if (!(a.fluxes == b.fluxes && a.grid == b.grid && a.run == b.run && a.initial == b.initial)) return false;
  if (a.signal.size() != b.signal.size()) return false;
  for (std::size_t i = 0; i < a.signal.size(); ++i)
    if (a.signal[i].duration != b.signal[i].duration || a.signal[i].phase != b.signal[i].phase ||
        a.signal[i].A != b.signal[i].A)
      return false;
  for (const auto& e : detail::tolerance_keys())
    if (a.tol.*e.field != b.tol.*e.field) return false;
  return true;
}

// Cell averages of the piecewise-constant initial datum; uncovered cells hold the empty-road density
// (a^j, or c^j for a reversed flux).
inline Field initial_field(const Scenario& sc) {
  Field f = Field::zeros(sc.grid.L, sc.grid.dx, sc.layout());
  for (int j = 0; j < 3; ++j) {
    auto& u = f.u[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < u.size(); ++i) {
      double xl = f.x_center(j, i) - 0.5 * f.dx, xr = xl + f.dx;
      double covered = 0.0, mass = 0.0;
      for (const auto& s : sc.initial) {
        if (s.branch != j) continue;
        double w = std::max(0.0, std::min(xr, s.to) - std::max(xl, s.from));
        covered += w;
        mass += w * s.rho;
      }
      const Flux& fj = sc.fluxes[static_cast<std::size_t>(j)];
      u[i] = (mass + std::max(0.0, f.dx - covered) * (fj.is_reversed() ? fj.c() : fj.a())) / f.dx;
    }
  }
  return f;
}

// Converging scenario obtained by reversing a diverging one: f^j -> f^j(-.), rho^j(x) -> -rho^j(-x).
inline Scenario reversed_scenario(const Scenario& sc) {
  Scenario r = sc;
  for (auto& f : r.fluxes) f = f.reversed();
  r.run.model = sc.run.model == Model::two_to_one ? Model::meso : Model::two_to_one;
  for (auto& s : r.initial) {
    double from = -s.to, to = -s.from;
    s.from = from;
    s.to = to;
    s.rho = -s.rho;
  }
  return r;
}

}  // namespace tlgerm
