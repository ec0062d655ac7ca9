#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "clonelab/clonelab.hpp"

using namespace clonelab;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kInputError = 2;
constexpr int kBudget = 3;

struct Options {
  bool json = false;
  bool verify = false;
  unsigned jobs = 1;
  std::string max_candidates;
};

// Raised when --verify rejects a result; signals a defect, not bad input.
struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Budget make_budget(const Options& o) {
  Budget b;
  b.jobs = o.jobs == 0 ? 1 : o.jobs;
  if (!o.max_candidates.empty()) {
    if (o.max_candidates == "inf") {
      b.max_candidates = std::numeric_limits<double>::infinity();
    } else {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(o.max_candidates, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != o.max_candidates.size() || !(v > 0)) throw Error("--max-candidates must be a positive number or 'inf'");
      b.max_candidates = v;
    }
  }
  return b;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw VerifyFailure("verification failed: " + what);
}

std::string tuple_text(const Tuple& t) {
  std::string out = "(";
  for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + std::to_string(t[i]);
  return out + ")";
}

Json tuple_json(const Tuple& t) { return Json(std::vector<Element>(t.begin(), t.end())); }

Json point_json(const Point& p) {
  Json a = Json::array();
  for (const auto& q : p) a.push_back(to_string(q));
  return a;
}

std::string values_text(const OperationTable& f) {
  std::string out = "values";
  for (Element v : f.values()) out += " " + std::to_string(v);
  return out;
}

void emit(const Options& o, const Json& j, const std::string& text) {
  if (o.json) std::cout << j.dump(2) << "\n";
  else std::cout << text;
}

Json header(const std::string& cmd) {
  Json j;
  j["schema"] = "clonelab/" + cmd + "/v1";
  return j;
}

FiniteStructure load_structure(const std::string& path) { return parse_structure(text::read_file(path)); }
Formula load_formula(const std::string& path) { return parse_formula(text::read_file(path)); }

// ---------------------------------------------------------------------------

int cmd_solve(const Options& o, const std::string& spath, const std::string& fpath) {
  auto s = load_structure(spath);
  auto f = load_formula(fpath);
  auto r = solve_pp_sentence(s, f);
  if (o.verify && r.sat) {
    if (f.kind == Formula::Kind::Exists) check(eval_formula(s, f.body(), r.witness), "witness does not satisfy the sentence");
    else check(eval_formula(s, f, {}), "sentence does not hold");
  }
  Json j = header("solve");
  j["result"] = r.sat ? "SAT" : "UNSAT";
  Json w = Json::object();
  std::string text = r.sat ? "SAT\n" : "UNSAT\n";
  for (const auto& [v, e] : r.witness) {
    w[v] = e;
    text += v + " = " + std::to_string(e) + "\n";
  }
  j["witness"] = w;
  emit(o, j, text);
  return kOk;
}

int cmd_pol(const Options& o, const std::string& spath, std::size_t k) {
  auto s = load_structure(spath);
  auto ops = polymorphisms(s, k, make_budget(o));
  Json j = header("pol");
  j["structure"] = s.name();
  j["domain"] = s.domain_size();
  j["arity"] = k;
  j["count"] = ops.size();
  Json list = Json::array();
  std::string text = std::to_string(ops.size()) + " polymorphisms of arity " + std::to_string(k) + " on " + s.name() + "\n";
  for (const auto& f : ops) {
    if (o.verify) check(is_polymorphism(f, s), "listed operation is not a polymorphism");
    Json e;
    e["values"] = f.values();
    if (f.is_projection() && k > 0) {
      e["projection"] = f.projection_index();
      text += to_string(Projection(k, f.projection_index())) + "\n";
    } else {
      e["projection"] = nullptr;
      text += values_text(f) + "\n";
    }
    list.push_back(e);
  }
  j["polymorphisms"] = list;
  emit(o, j, text);
  return kOk;
}

int cmd_ppdef(const Options& o, const std::string& spath, const std::string& rpath) {
  auto s = load_structure(spath);
  auto [sym, rel] = parse_relation(text::read_file(rpath), s.domain_size());
  Budget b = make_budget(o);
  auto d = is_pp_definable(s, rel, b);
  Json j = header("ppdef");
  j["relation"] = sym;
  j["definable"] = d.definable;
  std::string text;
  if (d) {
    auto f = construct_pp_definition(s, rel, b);  // model-checked internally
    if (o.verify) check(defined_relation(s, f, parameter_names(rel.arity)) == rel, "formula defines another relation");
    j["formula"] = to_string(f);
    text = "definable\n" + to_string(f) + "\n";
  } else {
    const auto& w = *d.witness;
    if (o.verify) {
      check(is_polymorphism(w, s), "witness is not a polymorphism");
      check(!rel.contains(apply_columnwise(w, d.violation.columns, rel.arity)), "witness preserves the relation");
    }
    Json wj;
    wj["arity"] = w.arity();
    wj["values"] = w.values();
    Json cols = Json::array();
    text = "not definable\nwitness polymorphism of arity " + std::to_string(w.arity()) + ": " + values_text(w) +
           "\ncolumns:";
    for (const auto& c : d.violation.columns) {
      cols.push_back(tuple_json(c));
      text += " " + tuple_text(c);
    }
    wj["columns"] = cols;
    wj["image"] = tuple_json(d.violation.image);
    j["witness"] = wj;
    text += "\nimage: " + tuple_text(d.violation.image) + "\n";
  }
  emit(o, j, text);
  return kOk;
}

int cmd_interpret_verify(const Options& o, const std::string& hpath, const std::string& tpath,
                         const std::string& ipath) {
  auto host = load_structure(hpath);
  auto target = load_structure(tpath);
  auto in = parse_interpretation(text::read_file(ipath));
  auto r = verify_interpretation(host, target, in);
  Json j = header("interpret-verify");
  j["valid"] = r.valid;
  std::string text;
  if (r.valid) {
    text = "valid\n";
  } else if (r.counterexample) {
    const auto& c = *r.counterexample;
    if (o.verify) {
      Tuple flat;
      for (const auto& t : c.host_tuples) flat.insert(flat.end(), t.begin(), t.end());
      auto params = atom_parameters(c.symbol, c.host_tuples.size(), in.dimension);
      Assignment a;
      for (std::size_t i = 0; i < params.size(); ++i) a[params[i]] = flat[i];
      check(eval_formula(host, in.atoms.at(c.symbol), a) == c.formula_holds, "counterexample formula side");
      check(c.target_holds != c.formula_holds, "counterexample sides agree");
    }
    Json cj;
    cj["symbol"] = c.symbol;
    Json ht = Json::array();
    for (const auto& t : c.host_tuples) ht.push_back(tuple_json(t));
    cj["host_tuples"] = ht;
    cj["target_elements"] = tuple_json(c.target_elements);
    cj["target_holds"] = c.target_holds;
    cj["formula_holds"] = c.formula_holds;
    j["counterexample"] = cj;
    text = "invalid: atom " + c.symbol + " at host tuples";
    for (const auto& t : c.host_tuples) text += " " + tuple_text(t);
    text += " -> target " + tuple_text(c.target_elements) + ": target " + (c.target_holds ? "holds" : "fails") +
            ", formula " + (c.formula_holds ? "holds" : "fails") + "\n";
  } else {
    j["reason"] = r.reason;
    text = "invalid: " + r.reason + "\n";
  }
  emit(o, j, text);
  return kOk;
}

int cmd_reduce(const Options& o, const std::string& ipath, const std::string& fpath, const std::string& hpath,
               const std::string& tpath) {
  auto in = parse_interpretation(text::read_file(ipath));
  auto phi = load_formula(fpath);
  auto psi = translate_sentence(in, phi);
  Json j = header("reduce");
  j["sentence"] = to_string(psi);
  std::string text = to_string(psi) + "\n";
  if (!hpath.empty() && !tpath.empty()) {
    auto host = load_structure(hpath);
    auto target = load_structure(tpath);
    bool h = solve_pp_sentence(host, psi).sat;
    bool t = solve_pp_sentence(target, phi).sat;
    if (o.verify) check(h == t, "host and target answers differ");
    j["host_result"] = h ? "SAT" : "UNSAT";
    j["target_result"] = t ? "SAT" : "UNSAT";
    text += std::string("host: ") + (h ? "SAT" : "UNSAT") + ", target: " + (t ? "SAT" : "UNSAT") + "\n";
  } else if (o.verify) {
    throw Error("--verify for reduce needs --host and --target");
  }
  emit(o, j, text);
  return kOk;
}

int cmd_hardness(const Options& o, const std::string& spath, std::size_t K, std::size_t N, const std::string& report) {
  auto s = load_structure(spath);
  Budget b = make_budget(o);
  auto rep = hardness_report(s, K, N, b);
  if (o.verify && rep.search.certificate) {
    auto v = verify_projection_certificate(s, *rep.search.certificate, b);
    check(v.ok, v.reason);
  }
  if (!report.empty()) {
    std::ofstream out(report, std::ios::binary);
    if (!out) throw Error("cannot write '" + report + "'");
    out << rep.text;
  }
  Json j = header("hardness");
  j["verdict"] = rep.verdict == HardnessReport::Verdict::Hard ? "hard" : "inconclusive";
  j["max_arity"] = K;
  j["max_power"] = N;
  j["projection_clone"] = rep.projection_clone.yes;
  j["constant_obstruction"] = rep.search.constant_obstruction;
  if (rep.search.certificate) {
    const auto& c = *rep.search.certificate;
    auto dec = [&](Rank r) { return tuple_json(unrank(r, s.domain_size(), c.power)); };
    Json cj;
    cj["power"] = c.power;
    Json gens = Json::array(), sub = Json::array(), theta = Json::array(), induced = Json::array();
    for (Rank g : c.generators) gens.push_back(dec(g));
    for (Rank e : c.subalgebra) sub.push_back(dec(e));
    for (const auto& blk : c.theta.blocks) {
      Json bj = Json::array();
      for (Element i : blk) bj.push_back(dec(c.subalgebra[i]));
      theta.push_back(bj);
    }
    for (const auto& p : c.induced) induced.push_back({{"arity", p.arity}, {"index", p.index}});
    cj["generators"] = gens;
    cj["subalgebra"] = sub;
    cj["theta"] = theta;
    cj["induced"] = induced;
    j["certificate"] = cj;
  }
  j["text"] = rep.text;
  emit(o, j, rep.text);
  return kOk;
}

int cmd_betw_solve(const Options& o, const std::string& path) {
  auto inst = parse_betw_instance(text::read_file(path));
  auto r = solve_betweenness(inst);
  if (o.verify && r) check(verify_order(inst, r.order), "order violates a constraint");
  Json j = header("betw-solve");
  j["result"] = r ? "SAT" : "UNSAT";
  Json order = Json::array();
  std::string text = r ? "SAT\n" : "UNSAT\n";
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    order.push_back(inst.vars[r.order[i]]);
    text += (i ? " < " : "") + inst.vars[r.order[i]];
  }
  if (r && !r.order.empty()) text += "\n";
  j["order"] = order;
  emit(o, j, text);
  return kOk;
}

Json candidate_json(const Candidate& c) {
  return {{"d", c.d}, {"direction", c.increasing ? "increasing" : "decreasing"}};
}

void classification_out(const Options& o, const FunctionSample& fs, const Classification& c, Json& j, std::string& text) {
  j["kind"] = kind_name(c.kind);
  text += kind_name(c.kind);
  if (c.kind == Classification::Kind::Classified) {
    j["d"] = c.candidate.d;
    j["direction"] = c.candidate.increasing ? "increasing" : "decreasing";
    text += ": " + to_string(c.candidate);
  }
  text += "\n";
  Json surv = Json::array(), viol = Json::array();
  for (const auto& s : c.survivors) {
    surv.push_back(candidate_json(s));
    if (c.kind == Classification::Kind::Ambiguous) text += "  consistent: " + to_string(s) + "\n";
  }
  for (const auto& [cand, rows] : c.violations) {
    const auto& x = fs[rows.first];
    const auto& y = fs[rows.second];
    if (o.verify) {
      bool bad = cand.increasing ? !(x.value < y.value) : !(x.value > y.value);
      check(all_distinct(x.x, y.x) && x.x[cand.d - 1] < y.x[cand.d - 1] && bad, "classification witness");
    }
    Json v = candidate_json(cand);
    v["x"] = point_json(x.x);
    v["y"] = point_json(y.x);
    v["fx"] = to_string(x.value);
    v["fy"] = to_string(y.value);
    viol.push_back(v);
    text += "  rejects " + to_string(cand) + ": f" + FunctionSample::format(x.x) + " = " + to_string(x.value) + ", f" +
            FunctionSample::format(y.x) + " = " + to_string(y.value) + "\n";
  }
  j["survivors"] = surv;
  j["violations"] = viol;
}

int cmd_betw_classify(const Options& o, const std::string& path) {
  auto fs = parse_sample(text::read_file(path));
  auto c = classify(fs);
  Json j = header("betw-classify");
  std::string text;
  classification_out(o, fs, c, j, text);
  emit(o, j, text);
  return kOk;
}

int cmd_betw_falsify(const Options& o, const std::string& epath, const std::string& spath, std::size_t k_opt) {
  auto f = parse_expression(text::read_file(epath));
  std::size_t k = k_opt ? k_opt : arity(*f);
  if (k < arity(*f)) throw Error("--arity is smaller than the largest variable index");
  if (k == 0) throw Error("expression has no variables; pass --arity");
  FunctionSample fs = spath.empty() ? sample_function(*f, k, grid_points(k, -2, 2)) : parse_sample(text::read_file(spath));
  if (fs.arity() != k) throw ShapeError("sample arity differs from the expression arity");
  for (const auto& r : fs.rows())
    if (eval(*f, r.x) != r.value) throw Error("sample row " + FunctionSample::format(r.x) + " disagrees with the expression");
  auto cls = classify(fs);
  auto tr = run_falsifier(*f, k, falsifier_witnesses(*f, k, fs, cls));
  if (o.verify && tr.violation) check(verify_violation(*f, *tr.violation), "falsifier violation");
  Json j = header("betw-falsify");
  j["expression"] = to_string(*f);
  j["arity"] = k;
  j["classification"] = kind_name(cls.kind);
  j["kind"] = kind_name(tr.kind);
  std::string text = "expression " + to_string(*f) + "\nclassification: " + kind_name(cls.kind) + "\n" +
                     kind_name(tr.kind) + "\n";
  if (tr.kind == FalsifierTrace::Kind::NotApplicable) {
    j["reason"] = tr.reason;
    text += "reason: " + tr.reason + "\n";
  } else {
    j["sign"] = tr.sign;
    j["stage"] = tr.stage;
    if (tr.kind == FalsifierTrace::Kind::Violation) text += std::string("running on ") + (tr.sign > 0 ? "f" : "-f") + "\n";
    Json cs = Json::array(), steps = Json::array();
    for (const auto& c : tr.c) cs.push_back(point_json(c));
    for (const auto& st : tr.steps) {
      steps.push_back({{"d", st.d},
                       {"x", point_json(st.witness.x)},
                       {"y", point_json(st.witness.y)},
                       {"t", point_json(st.t)},
                       {"next", point_json(st.next)}});
      text += "step d=" + std::to_string(st.d) + ": witness " + FunctionSample::format(st.witness.x) + " " +
              FunctionSample::format(st.witness.y) + ", t = " + FunctionSample::format(st.t) +
              ", c = " + FunctionSample::format(st.next) + "\n";
    }
    j["c"] = cs;
    j["steps"] = steps;
    text += "stage: " + tr.stage + "\n";
  }
  if (tr.violation) {
    Json args = Json::array(), vals = Json::array();
    text += "violation:";
    for (int i = 0; i < 3; ++i) {
      args.push_back(point_json(tr.violation->args[i]));
      vals.push_back(to_string(tr.violation->values[i]));
      text += " f" + FunctionSample::format(tr.violation->args[i]) + " = " + to_string(tr.violation->values[i]) +
              (i < 2 ? "," : "\n");
    }
    j["violation"] = {{"args", args}, {"values", vals}};
  }
  emit(o, j, text);
  return kOk;
}

Json hsp_certificate_json(const Algebra& a, const HSPCertificate& c) {
  auto dec = [&](Rank r) { return tuple_json(unrank(r, a.size(), c.power)); };
  Json cj;
  cj["power"] = c.power;
  Json gens = Json::array(), sub = Json::array(), h = Json::array(), ker = Json::array();
  for (Rank g : c.generators) gens.push_back(dec(g));
  for (Rank e : c.subalgebra) sub.push_back(dec(e));
  for (const auto& [e, v] : c.h) h.push_back({dec(e), v});
  for (const auto& blk : c.kernel.blocks) {
    Json bj = Json::array();
    for (Element i : blk) bj.push_back(dec(c.subalgebra[i]));
    ker.push_back(bj);
  }
  cj["generators"] = gens;
  cj["subalgebra"] = sub;
  cj["h"] = h;
  cj["kernel"] = ker;
  return cj;
}

std::string hsp_certificate_text(const Algebra& a, const HSPCertificate& c) {
  std::string text = "power n = " + std::to_string(c.power) + "\ngenerators:";
  for (Rank g : c.generators) text += " " + tuple_text(unrank(g, a.size(), c.power));
  text += "\n|S| = " + std::to_string(c.subalgebra.size()) + "\nh:";
  for (const auto& [e, v] : c.h) text += " " + tuple_text(unrank(e, a.size(), c.power)) + "->" + std::to_string(v);
  return text + "\n";
}

int cmd_algebra_hsp(const Options& o, const std::string& apath, const std::string& bpath, std::size_t n_max) {
  auto a = parse_algebra(text::read_file(apath));
  auto b = parse_algebra(text::read_file(bpath));
  if (n_max == 0) n_max = static_cast<std::size_t>(ipow(a.size(), b.size()));
  auto r = hsp_fin_member(a, b, n_max, make_budget(o));
  if (o.verify && r.certificate) {
    auto v = verify_certificate(a, b, *r.certificate);
    check(v.ok, v.reason);
  }
  Json j = header("algebra-hsp");
  j["kind"] = to_string(r.kind);
  j["n_max"] = r.n_max;
  j["bound"] = r.bound;
  std::string text = std::string(to_string(r.kind)) + " (n_max=" + std::to_string(r.n_max) +
                     ", bound=" + std::to_string(r.bound) + ")\n";
  if (r.certificate) {
    j["certificate"] = hsp_certificate_json(a, *r.certificate);
    text += hsp_certificate_text(a, *r.certificate);
  }
  j["transcript"] = r.transcript;
  emit(o, j, text);
  return kOk;
}

int cmd_algebra_nathom(const Options& o, const std::string& apath, const std::string& bpath, std::size_t depth) {
  auto a = parse_algebra(text::read_file(apath));
  auto b = parse_algebra(text::read_file(bpath));
  auto r = natural_homomorphism_exists(a, b, depth, make_budget(o));
  if (o.verify) {
    if (r.witness) check(verify_equation_witness(a, b, *r.witness), "equation witness");
    if (r.certificate) {
      auto v = verify_certificate(a, b, *r.certificate);
      check(v.ok, v.reason);
    }
  }
  Json j = header("algebra-nathom");
  j["kind"] = to_string(r.kind);
  j["depth"] = r.depth;
  std::string text = std::string(to_string(r.kind)) + "\n";
  if (r.witness) {
    std::string s = to_string(*r.witness->s, a), t = to_string(*r.witness->t, a);
    j["witness"] = {{"s", s}, {"t", t}, {"variables", r.witness->variables}};
    text += "equation " + s + " = " + t + " holds in " + a.name() + " and fails in " + b.name() + "\n";
  }
  if (r.certificate) {
    j["certificate"] = hsp_certificate_json(a, *r.certificate);
    text += hsp_certificate_text(a, *r.certificate);
  }
  if (!r.note.empty()) {
    j["note"] = r.note;
    text += r.note + "\n";
  }
  emit(o, j, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polymorphism clones, pp-definability, interpretations and hardness certificates"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_flag("--json", o.json, "Emit versioned JSON instead of text");
  app.add_flag("--verify", o.verify, "Re-check every witness before printing it");
  app.add_option("--jobs", o.jobs, "Worker threads; output does not depend on it")->check(CLI::PositiveNumber);
  app.add_option("--max-candidates", o.max_candidates, "Candidate budget for exhaustive searches, or 'inf'");

  std::string structure, sentence, relation, host, target, interp, report, instance, sample, expr, alg_a, alg_b;
  std::size_t arity = 2, max_arity = 3, max_power = 1, depth = 3, falsify_arity = 0, n_max = 0;
  std::function<int()> run;

  auto* solve = app.add_subcommand("solve", "Decide a pp-sentence over a finite structure");
  solve->add_option("--structure", structure)->required();
  solve->add_option("--sentence", sentence)->required();
  solve->callback([&] { run = [&] { return cmd_solve(o, structure, sentence); }; });

  auto* pol = app.add_subcommand("pol", "List the polymorphisms of one arity");
  pol->add_option("--structure", structure)->required();
  pol->add_option("--arity", arity)->required();
  pol->callback([&] { run = [&] { return cmd_pol(o, structure, arity); }; });

  auto* ppdef = app.add_subcommand("ppdef", "Decide pp-definability of a relation");
  ppdef->add_option("--structure", structure)->required();
  ppdef->add_option("--relation", relation)->required();
  ppdef->callback([&] { run = [&] { return cmd_ppdef(o, structure, relation); }; });

  auto* interpret = app.add_subcommand("interpret", "Interpretations between structures");
  interpret->require_subcommand(1);
  auto* iverify = interpret->add_subcommand("verify", "Check an interpretation of the target in the host");
  iverify->add_option("--host", host)->required();
  iverify->add_option("--target", target)->required();
  iverify->add_option("--interp", interp)->required();
  iverify->callback([&] { run = [&] { return cmd_interpret_verify(o, host, target, interp); }; });

  auto* reduce = app.add_subcommand("reduce", "Translate a target sentence into a host sentence");
  reduce->add_option("--interp", interp)->required();
  reduce->add_option("--sentence", sentence)->required();
  reduce->add_option("--host", host, "Solve the translation here");
  reduce->add_option("--target", target, "Solve the original here");
  reduce->callback([&] { run = [&] { return cmd_reduce(o, interp, sentence, host, target); }; });

  auto* hard = app.add_subcommand("hardness", "Search for a two-element projection quotient");
  hard->add_option("--structure", structure)->required();
  hard->add_option("--max-arity", max_arity, "Polymorphism arity bound K")->capture_default_str();
  hard->add_option("--max-power", max_power, "Power bound N")->capture_default_str();
  hard->add_option("--report", report, "Also write the report text to this file");
  hard->callback([&] { run = [&] { return cmd_hardness(o, structure, max_arity, max_power, report); }; });

  auto* betw_cmd = app.add_subcommand("betw", "Betweenness over the rationals");
  betw_cmd->require_subcommand(1);
  auto* bsolve = betw_cmd->add_subcommand("solve", "Solve a Betweenness instance");
  bsolve->add_option("--instance", instance)->required();
  bsolve->callback([&] { run = [&] { return cmd_betw_solve(o, instance); }; });
  auto* bclass = betw_cmd->add_subcommand("classify", "Find the dominant coordinate of a sampled function");
  bclass->add_option("--sample", sample)->required();
  bclass->callback([&] { run = [&] { return cmd_betw_classify(o, sample); }; });
  auto* bfals = betw_cmd->add_subcommand("falsify", "Derive a Betw violation from an unclassifiable function");
  bfals->add_option("--expr", expr)->required();
  bfals->add_option("--sample", sample, "Sample for witness selection (default: the grid {-2..2}^k)");
  bfals->add_option("--arity", falsify_arity, "Arity k (default: largest variable index)");
  bfals->callback([&] { run = [&] { return cmd_betw_falsify(o, expr, sample, falsify_arity); }; });

  auto* alg = app.add_subcommand("algebra", "Finite algebras");
  alg->require_subcommand(1);
  auto* hsp = alg->add_subcommand("hsp", "Search for B in HSP^fin(A)");
  hsp->add_option("--a", alg_a)->required();
  hsp->add_option("--b", alg_b)->required();
  hsp->add_option("--max-power,--n-max", n_max, "Power bound (default: |A|^|B|)");
  hsp->callback([&] { run = [&] { return cmd_algebra_hsp(o, alg_a, alg_b, n_max); }; });
  auto* nathom = alg->add_subcommand("nathom", "Decide whether t^A -> t^B is well defined");
  nathom->add_option("--a", alg_a)->required();
  nathom->add_option("--b", alg_b)->required();
  nathom->add_option("--depth", depth, "Term depth of the equation search")->capture_default_str();
  nathom->callback([&] { run = [&] { return cmd_algebra_nathom(o, alg_a, alg_b, depth); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kInputError;
  }
  try {
    return run();
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const VerifyFailure& e) {
    std::cerr << e.what() << "\n";
    return kVerifyFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}
