// SPDX-License-Identifier: MIT
//
// Batch experiment runner: every estimator of the library behind one binary.
// Subcommands: gamma-curve, kernel-check, dims, gns, norms, tro-verify,
// dual-check, balanced-demo. Reports go to stdout as JSON (default) or CSV;
// witness files are self-contained JSON and replay through the --replay
// flags of their emitting subcommand. Equal configs produce byte-identical
// output: doubles are printed shortest-round-trip, seeds are explicit, and
// there are no timestamps. Wall-clock budgets are only consulted at restart
// boundaries, so a finite --budget-ms can change how many restarts run (the
// used count is in the report) but never the bytes of any number printed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "symcore/dualops.hpp"
#include "symcore/fnspace.hpp"
#include "symcore/json_io.hpp"
#include "symcore/trilinear.hpp"
#include "symcore/tro.hpp"

using namespace symcore;

namespace {

struct BadRange : std::runtime_error {
    explicit BadRange(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    std::uint64_t seed = 0x5eed;
    int restarts = 16;
    int truncation = 4;
    double tol = 1e-9;
    std::string out = "json";
    std::int64_t budget_ms = -1;
};

json config_json(const RunConfig& rc) {
    json j;
    j["seed"] = rc.seed;
    j["restarts"] = rc.restarts;
    j["truncation"] = rc.truncation;
    j["tol"] = rc.tol;
    j["out"] = rc.out;
    j["budget_ms"] = rc.budget_ms;
    return j;
}

void emit(const RunConfig& rc, const json& rep, const std::string& csv) {
    if (rc.out == "csv")
        std::cout << csv;
    else
        std::cout << rep.dump(2) << "\n";
}

// --- file formats -----------------------------------------------------------

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

json cvec_to_json(const std::vector<cplx>& v) {
    json re = json::array(), im = json::array();
    for (const cplx& z : v) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    json j;
    j["re"] = std::move(re);
    j["im"] = std::move(im);
    return j;
}

std::vector<cplx> cvec_from_json(const json& j) {
    const json& re = j.at("re");
    const json& im = j.at("im");
    if (re.size() != im.size()) throw ShapeMismatch("cvec: re/im length mismatch");
    std::vector<cplx> v;
    v.reserve(re.size());
    for (size_t i = 0; i < re.size(); ++i)
        v.push_back(cplx(re[i].get<double>(), im[i].get<double>()));
    return v;
}

json space_to_json(const ConcreteOpSpace& e) {
    json j;
    j["h"] = e.ambient_h();
    j["k"] = e.ambient_k();
    json basis = json::array();
    for (const CMatrix& b : e.basis()) basis.push_back(matrix_to_json(b));
    j["basis"] = std::move(basis);
    const SpaceTags& t = e.tags();
    json tags;
    tags["is_system"] = t.is_system;
    tags["is_subalgebra"] = t.is_subalgebra;
    tags["is_tro"] = t.is_tro;
    tags["unit"] = cvec_to_json(t.unit_coeffs);
    j["tags"] = std::move(tags);
    return j;
}

ConcreteOpSpace space_from_json(const json& j) {
    const int h = j.at("h").get<int>();
    const int k = j.at("k").get<int>();
    std::vector<CMatrix> basis;
    for (const json& bj : j.at("basis")) basis.push_back(matrix_from_json(bj));
    SpaceTags tags;
    if (j.contains("tags")) {
        const json& t = j.at("tags");
        tags.is_system = t.value("is_system", false);
        tags.is_subalgebra = t.value("is_subalgebra", false);
        tags.is_tro = t.value("is_tro", false);
        if (t.contains("unit")) tags.unit_coeffs = cvec_from_json(t.at("unit"));
    }
    return ConcreteOpSpace(h, k, basis, tags);
}

json level_to_json(const LevelElement& le) {
    json j;
    j["m"] = le.level_m();
    j["n"] = le.level_n();
    json slots = json::array();
    for (const std::vector<cplx>& slot : le.coeffs()) slots.push_back(cvec_to_json(slot));
    j["slots"] = std::move(slots);
    return j;
}

LevelElement level_from_json(const ConcreteOpSpace& sp, const json& j) {
    const int m = j.at("m").get<int>();
    const int n = j.at("n").get<int>();
    std::vector<std::vector<cplx>> grid;
    for (const json& sj : j.at("slots")) grid.push_back(cvec_from_json(sj));
    if (grid.size() != static_cast<size_t>(m) * static_cast<size_t>(n))
        throw ShapeMismatch("level: slot count does not match m*n");
    return LevelElement(sp, m, n, grid);
}

json tensor_to_json(const TensorElement& u) {
    json j;
    j["e"] = space_to_json(u.e());
    j["s"] = space_to_json(u.s());
    j["n"] = u.n();
    json blocks = json::array();
    for (const TensorElement::Block& b : u.blocks()) {
        json bj;
        bj["y"] = level_to_json(b.y);
        bj["s"] = level_to_json(b.s);
        bj["x"] = level_to_json(b.x);
        blocks.push_back(std::move(bj));
    }
    j["blocks"] = std::move(blocks);
    return j;
}

TensorElement tensor_from_json(const json& j) {
    ConcreteOpSpace e = space_from_json(j.at("e"));
    ConcreteOpSpace s = space_from_json(j.at("s"));
    const int n = j.at("n").get<int>();
    std::vector<TensorElement::Block> blocks;
    for (const json& bj : j.at("blocks"))
        blocks.push_back(TensorElement::Block{level_from_json(e, bj.at("y")),
                                              level_from_json(s, bj.at("s")),
                                              level_from_json(e, bj.at("x"))});
    return TensorElement(e, s, n, blocks);
}

json linmap_to_json(const LinMap& f) {
    json j;
    j["domain"] = space_to_json(f.domain());
    j["r_out"] = f.r_out();
    j["c_out"] = f.c_out();
    j["action"] = matrix_to_json(f.action());
    return j;
}

LinMap linmap_from_json(const json& j) {
    return LinMap(space_from_json(j.at("domain")), j.at("r_out").get<int>(),
                  j.at("c_out").get<int>(), matrix_from_json(j.at("action")));
}

json kernel_to_json(const KernelFunction& kf) {
    json j;
    j["omega"] = kf.omega;
    j["n"] = kf.n;
    json blocks = json::array();
    for (const CMatrix& b : kf.blocks) blocks.push_back(matrix_to_json(b));
    j["blocks"] = std::move(blocks);
    return j;
}

KernelFunction kernel_from_json(const json& j) {
    KernelFunction kf;
    kf.omega = j.at("omega").get<int>();
    kf.n = j.at("n").get<int>();
    for (const json& bj : j.at("blocks")) kf.blocks.push_back(matrix_from_json(bj));
    if (kf.omega < 1 || kf.n < 1 ||
        kf.blocks.size() != static_cast<size_t>(kf.omega) * static_cast<size_t>(kf.omega))
        throw ShapeMismatch("kernel: need omega^2 blocks");
    for (const CMatrix& b : kf.blocks)
        if (b.rows() != kf.n || b.cols() != kf.n)
            throw ShapeMismatch("kernel: every block must be n x n");
    return kf;
}

// --- shared builders ---------------------------------------------------------

std::vector<cplx> coeffs_of(const ConcreteOpSpace& e, const CMatrix& a) {
    Projection p = project_onto(e, a);
    if (p.residual > 1e-9) throw ShapeMismatch("element leaves the space");
    return p.coeffs;
}

ConcreteOpSpace diag_space(int n) {
    std::vector<CMatrix> basis;
    for (int i = 0; i < n; ++i) {
        CMatrix m(n, n);
        m(i, i) = 1;
        basis.push_back(m);
    }
    SpaceTags t;
    t.is_system = true;
    t.is_subalgebra = true;
    t.unit_coeffs.assign(static_cast<size_t>(n), cplx(1.0, 0.0));
    return ConcreteOpSpace(n, n, basis, t);
}

// tensor over the diagonal space whose kernel view is exactly kf: strands
// (x0, i0) with y = delta_{x0} in row i0 and x carrying row i0 of the blocks
TensorElement tensor_from_kernel(const KernelFunction& kf, const ConcreteOpSpace& e,
                                 const ConcreteOpSpace& s) {
    const int om = kf.omega, n = kf.n;
    std::vector<TensorElement::Block> blocks;
    for (int x0 = 0; x0 < om; ++x0)
        for (int i0 = 0; i0 < n; ++i0) {
            std::vector<std::vector<cplx>> yg(static_cast<size_t>(n)),
                xg(static_cast<size_t>(n));
            for (int j = 0; j < n; ++j) {
                yg[static_cast<size_t>(j)].assign(static_cast<size_t>(om), cplx(0.0, 0.0));
                xg[static_cast<size_t>(j)].assign(static_cast<size_t>(om), cplx(0.0, 0.0));
            }
            yg[static_cast<size_t>(i0)][static_cast<size_t>(x0)] = 1.0;
            for (int j = 0; j < n; ++j)
                for (int b = 0; b < om; ++b)
                    xg[static_cast<size_t>(j)][static_cast<size_t>(b)] = kf.at(x0, b)(i0, j);
            blocks.push_back(TensorElement::Block{LevelElement(e, 1, n, yg),
                                                  LevelElement(s, 1, 1, {{cplx(1.0, 0.0)}}),
                                                  LevelElement(e, 1, n, xg)});
        }
    return TensorElement(e, s, n, blocks);
}

double herm_min_eig(const CMatrix& a) {
    CMatrix h = a + a.adjoint();
    h *= cplx(0.5, 0.0);
    return min_herm_eigenvalue(h);
}

LevelElement random_level_contraction(const ConcreteOpSpace& sp, int m, int n, Rng& rng) {
    std::vector<std::vector<cplx>> g(static_cast<size_t>(m) * static_cast<size_t>(n));
    for (auto& slot : g) {
        slot.resize(static_cast<size_t>(sp.dim()));
        for (cplx& z : slot) z = rng.cgaussian();
    }
    LevelElement le(sp, m, n, g);
    const double nv = op_norm(le.concrete());
    if (nv > 1.0) {
        for (auto& slot : g)
            for (cplx& z : slot) z /= nv;
        return LevelElement(sp, m, n, g);
    }
    return le;
}

LevelElement unit_level(const ConcreteOpSpace& s, int m) {
    std::vector<std::vector<cplx>> g(static_cast<size_t>(m) * static_cast<size_t>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            auto& slot = g[static_cast<size_t>(i) * m + j];
            if (i == j)
                slot = s.tags().unit_coeffs;
            else
                slot.assign(static_cast<size_t>(s.dim()), cplx(0.0, 0.0));
        }
    return LevelElement(s, m, m, g);
}

// certified lower bound for ||theta||_cb from amplified evaluations at
// contractive levels; the diagonal trick theta(x*, 1, x) = phi(x)* phi(x)
// makes the bound track ||phi||_cb^2
double theta_cb_sampled_lower(const TrilinearForm& th, Rng& rng, int trials) {
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        const int m = 1 + (t % 2);
        const int n = 1 + ((t / 2) % 2);
        LevelElement x = random_level_contraction(th.e(), m, n, rng);
        LevelElement y = (t % 3 == 0) ? x : random_level_contraction(th.e(), m, n, rng);
        LevelElement sv =
            (t % 2 == 0) ? unit_level(th.s(), m) : random_level_contraction(th.s(), m, m, rng);
        best = std::max(best, op_norm(amplify(th, y, sv, x)));
    }
    return best;
}

double reconstruction_residual_of(const TrilinearForm& theta, const LinMap& phi,
                                  const LinMap& psi) {
    const int d = theta.e().dim(), ds = theta.s().dim();
    std::vector<CMatrix> phis;
    for (int i = 0; i < d; ++i) {
        std::vector<cplx> ei(static_cast<size_t>(d), cplx(0.0, 0.0));
        ei[static_cast<size_t>(i)] = 1.0;
        phis.push_back(phi.apply_coeffs(ei));
    }
    double r = 0.0;
    for (int j = 0; j < ds; ++j) {
        std::vector<cplx> ej(static_cast<size_t>(ds), cplx(0.0, 0.0));
        ej[static_cast<size_t>(j)] = 1.0;
        CMatrix pj = psi.apply_coeffs(ej);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) {
                CMatrix rec = phis[static_cast<size_t>(i)].adjoint() * pj *
                              phis[static_cast<size_t>(l)];
                r = std::max(r, (rec - theta.at(i, j, l)).max_abs());
            }
    }
    return r;
}

// --- gamma-curve -------------------------------------------------------------

int cmd_gamma_curve(const RunConfig& rc, const std::vector<double>& ts) {
    for (double t : ts)
        if (!(t > 0.0 && t < 1.0))
            throw BadRange("gamma-curve: t must lie strictly between 0 and 1, got " +
                           csv_double(t));
    json rep = make_report("gamma-curve", config_json(rc));
    json rows = json::array(), curve = json::array();
    std::string csv = "t,k,lower,estimate\n";

    CMatrix p(2, 2);
    p(0, 0) = 1;
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = scalar_middle(1);
    std::vector<cplx> pc = coeffs_of(e, p);

    PlusConfig plc;
    plc.restarts = rc.restarts;
    plc.seed = rc.seed;
    plc.budget_ms = rc.budget_ms;

    for (double t : ts) {
        CMatrix ut(2, 2);
        const double sn = std::sqrt(1.0 - t * t);
        ut(0, 0) = t;
        ut(1, 0) = sn;
        ut(0, 1) = -sn;
        ut(1, 1) = t;
        CMatrix utp = ut * p;
        double last = 0.0;
        for (int k = 1; k <= rc.truncation; ++k) {
            PlusResult r = plus_norm({{p, utp}}, k, plc);
            json row;
            row["t"] = t;
            row["k"] = k;
            row["lower"] = r.value;
            row["estimate"] = r.interval.upper;
            rows.push_back(std::move(row));
            csv += csv_double(t) + "," + std::to_string(k) + "," + csv_double(r.value) + "," +
                   csv_double(r.interval.upper) + "\n";
            last = r.interval.upper;
        }
        TensorElement u = TensorElement::elementary(e, s, pc, {cplx(1.0, 0.0)},
                                                    coeffs_of(e, utp));
        HaagerupWitness hw = haagerup_upper(u, 60, rc.seed);
        json c;
        c["t"] = t;
        c["estimate"] = last;
        c["haagerup"] = hw.value;
        c["gap"] = last < 1.0 - 1e-3;
        curve.push_back(std::move(c));
    }
    rep["rows"] = std::move(rows);
    rep["curve"] = std::move(curve);
    emit(rc, rep, csv);
    return 0;
}

// --- kernel-check ------------------------------------------------------------

int cmd_kernel_check(const RunConfig& rc, const std::string& file, std::string witness_out,
                     const std::string& replay) {
    if (!replay.empty()) {
        json w = load_json(replay);
        KernelFunction kf = kernel_from_json(w.at("kernel"));
        AdmissiblePair pair{linmap_from_json(w.at("pair").at("phi")),
                            linmap_from_json(w.at("pair").at("psi"))};
        TensorElement u = tensor_from_kernel(kf, pair.phi.domain(), pair.psi.domain());
        const double lam = herm_min_eig(eval_pair(pair, u));
        const double claimed = w.at("claims").at("pair_eval_min_eig").get<double>();
        DiscreteMeasure counting;
        for (int i = 0; i < kf.omega; ++i) {
            counting.support.push_back(i);
            counting.weights.push_back(1.0);
        }
        const double ilam = min_herm_eigenvalue(integral_operator(kf, counting));
        const double iclaimed = w.at("claims").at("integral_min_eig").get<double>();
        const bool ok = std::abs(lam - claimed) <= 1e-9 && lam <= -1e-9 &&
                        std::abs(ilam - iclaimed) <= 1e-9;
        json rep = make_report("kernel-check", config_json(rc));
        rep["mode"] = "replay";
        rep["witness"] = replay;
        rep["recomputed_pair_eval_min_eig"] = lam;
        rep["claimed_pair_eval_min_eig"] = claimed;
        rep["recomputed_integral_min_eig"] = ilam;
        rep["claimed_integral_min_eig"] = iclaimed;
        rep["replay_ok"] = ok;
        std::string csv = "field,value\nreplay_ok," + std::string(ok ? "true" : "false") + "\n";
        emit(rc, rep, csv);
        return ok ? 0 : 3;
    }

    KernelFunction kf = kernel_from_json(load_json(file));
    KernelVerdict v = is_positive_kernel(kf);
    json rep = make_report("kernel-check", config_json(rc));
    rep["file"] = file;
    rep["omega"] = kf.omega;
    rep["n"] = kf.n;
    rep["positive"] = v.positive;
    rep["min_eig"] = v.min_eig;
    std::string csv = "field,value\npositive," + std::string(v.positive ? "true" : "false") +
                      "\nmin_eig," + csv_double(v.min_eig) + "\n";
    if (v.positive) {
        rep["verdict"] = "positive";
    } else {
        rep["verdict"] = "refuted";
        ConcreteOpSpace e = diag_space(kf.omega);
        ConcreteOpSpace s = scalar_middle(1);
        TensorElement u = tensor_from_kernel(kf, e, s);
        KernelFunction back = kernel_of_tensor(u);
        double enc = 0.0;
        for (size_t i = 0; i < kf.blocks.size(); ++i)
            enc = std::max(enc, (back.blocks[i] - kf.blocks[i]).max_abs());
        KernelRefutation ref = refute_kernel(u);
        rep["pair_eval_min_eig"] = ref.pair_eval_min_eig;
        rep["integral_min_eig"] = ref.integral_min_eig;
        rep["encoding_residual"] = enc;
        rep["certificate_refuted"] =
            ref.certificate.verdict == Verdict::Refuted;
        if (witness_out.empty()) witness_out = file + ".witness.json";
        json w;
        w["kind"] = "kernel-refutation";
        w["version"] = kToolVersion;
        w["kernel"] = kernel_to_json(kf);
        json pj;
        pj["phi"] = linmap_to_json(ref.pair.phi);
        pj["psi"] = linmap_to_json(ref.pair.psi);
        w["pair"] = std::move(pj);
        json claims;
        claims["pair_eval_min_eig"] = ref.pair_eval_min_eig;
        claims["integral_min_eig"] = ref.integral_min_eig;
        w["claims"] = std::move(claims);
        save_json(witness_out, w);
        rep["witness_path"] = witness_out;
        csv += "pair_eval_min_eig," + csv_double(ref.pair_eval_min_eig) + "\n";
        csv += "integral_min_eig," + csv_double(ref.integral_min_eig) + "\n";
    }
    emit(rc, rep, csv);
    return 0;
}

// --- dims ---------------------------------------------------------------------

int cmd_dims(const RunConfig& rc, const std::vector<std::string>& builtins,
             const std::string& file) {
    json rep = make_report("dims", config_json(rc));
    json rows = json::array();
    std::string csv = "name,dim_e,dim_product_span,dim_sym,raw_obstruction,not_operator_system\n";

    auto add_row = [&](const std::string& name, const ConcreteOpSpace& e,
                       const std::string& realisation, bool balanced_cross,
                       const std::string& note) {
        std::vector<CMatrix> stars;
        for (const CMatrix& b : e.basis()) stars.push_back(b.adjoint());
        const int dps = product_span(stars, e.basis()).dim();
        const bool raw = not_operator_system_by_dimension(e);
        bool headline = raw;
        json row;
        row["name"] = name;
        row["realisation"] = realisation;
        row["dim_e"] = e.dim();
        row["dim_product_span"] = dps;
        row["dim_sym"] = e.dim() * e.dim();
        row["raw_obstruction"] = raw;
        if (balanced_cross) {
            CollapseReport cr = tro_collapse_check(make_tro(e), e, 8, rc.seed);
            row["balanced_collapse_ok"] = cr.ok;
            if (cr.ok) headline = false;
        }
        row["not_operator_system"] = headline;
        row["note"] = note;
        rows.push_back(std::move(row));
        csv += csv_escape(name) + "," + std::to_string(e.dim()) + "," + std::to_string(dps) +
               "," + std::to_string(e.dim() * e.dim()) + "," + (raw ? "true" : "false") + "," +
               (headline ? "true" : "false") + "\n";
    };

    auto add_builtin = [&](const std::string& name) {
        if (name == "D2" || name == "D3") {
            const int n = name == "D2" ? 2 : 3;
            add_row(name, space_Dn(n), "diagonal",
                    false, "span(E*E) stays diagonal, below the square dimension");
        } else if (name == "M32" || name == "M42") {
            const int k = name == "M32" ? 3 : 4;
            add_row(name, space_Mkn(k, 2), "rectangular",
                    false, "span(E*E) is the small corner algebra, below the square dimension");
        } else if (name == "C2" || name == "C3") {
            const int n = name == "C2" ? 2 : 3;
            add_row(name, space_Rn(n), "rows (column factor via its row predual)",
                    false,
                    "span(E*E) fills the full matrix algebra; the symmetrisation is a matrix "
                    "algebra, no obstruction");
        } else if (name == "M2") {
            add_row(name, space_Mn(2), "full algebra, balanced cross-check",
                    true,
                    "unbalanced symmetrisation is dimension-obstructed; the balanced object "
                    "collapses onto the algebra itself");
        } else {
            throw BadRange("dims: unknown builtin " + name +
                           " (expected D2, D3, M32, M42, C2, C3, M2)");
        }
    };

    if (!file.empty())
        add_row(file, space_from_json(load_json(file)), "file", false,
                "raw dimension check on the supplied basis");
    std::vector<std::string> names = builtins;
    if (names.empty() && file.empty())
        names = {"D2", "D3", "M32", "M42", "C2", "C3", "M2"};
    for (const std::string& name : names) add_builtin(name);

    rep["rows"] = std::move(rows);
    emit(rc, rep, csv);
    return 0;
}

// --- gns ----------------------------------------------------------------------

int cmd_gns(const RunConfig& rc, const std::string& file, const std::string& out_dir,
            const std::string& replay_dir) {
    json fj = load_json(file);
    ConcreteOpSpace e = space_from_json(fj.at("e"));
    ConcreteOpSpace s = space_from_json(fj.at("s"));
    const int r = fj.at("r").get<int>();
    std::vector<CMatrix> tensor;
    for (const json& mj : fj.at("tensor")) tensor.push_back(matrix_from_json(mj));
    TrilinearForm theta(e, s, r, tensor);

    if (!replay_dir.empty()) {
        LinMap phi = linmap_from_json(load_json(replay_dir + "/phi.json"));
        LinMap psi = linmap_from_json(load_json(replay_dir + "/psi.json"));
        CMatrix gram = matrix_from_json(load_json(replay_dir + "/gram.json"));
        json stored = load_json(replay_dir + "/gns_report.json");
        const double resid = reconstruction_residual_of(theta, phi, psi);
        const double claimed = stored.at("reconstruction_residual").get<double>();
        const double gram_min = gram.rows() > 0 ? min_herm_eigenvalue(gram) : 0.0;
        const bool ok = std::abs(resid - claimed) <= 1e-9 &&
                        gram_min >= -1e-9 * std::max(1.0, op_norm(gram));
        json rep = make_report("gns", config_json(rc));
        rep["mode"] = "replay";
        rep["recomputed_residual"] = resid;
        rep["claimed_residual"] = claimed;
        rep["gram_min_eig"] = gram_min;
        rep["replay_ok"] = ok;
        std::string csv = "field,value\nreplay_ok," + std::string(ok ? "true" : "false") + "\n";
        emit(rc, rep, csv);
        return ok ? 0 : 3;
    }

    Rng rng(rc.seed);
    PositivityReport pos = sample_positivity(theta, rng, 64, 2, rc.tol);
    if (!pos.positive)
        throw NotPositive("gns: positivity pre-check failed, min eigenvalue " +
                          csv_double(pos.min_eig));
    GnsFactorisation g = gns_factorise(theta);

    CbConfig cc;
    cc.restarts = std::max(4, rc.restarts / 2);
    cc.seed = rc.seed;
    NormInterval phin = cb_norm(g.phi, cc);
    const double tlo = theta_cb_sampled_lower(theta, rng, 24);
    const double tup = phin.upper * phin.upper;
    const double phi_sq = phin.lower * phin.lower;
    const bool identity_ok = phi_sq >= tlo - 1e-4 && phi_sq <= tup + 1e-4;

    std::filesystem::create_directories(out_dir);
    save_json(out_dir + "/phi.json", linmap_to_json(g.phi));
    save_json(out_dir + "/psi.json", linmap_to_json(g.psi));
    save_json(out_dir + "/gram.json", matrix_to_json(g.gram));

    json rep = make_report("gns", config_json(rc));
    rep["file"] = file;
    rep["k_dim"] = g.k_dim;
    rep["reconstruction_residual"] = g.reconstruction_residual;
    rep["psi_unital"] = g.psi_unital;
    rep["psi_cp"] = g.psi_cp;
    rep["psi_min_eig"] = g.psi_min_eig;
    rep["psi_route"] = g.psi_route == CpRoute::Choi      ? "choi"
                       : g.psi_route == CpRoute::Diagonal ? "diagonal"
                                                          : "sampled";
    rep["phi_cb_lower"] = phin.lower;
    rep["phi_cb_upper"] = phin.upper;
    rep["theta_cb_sampled_lower"] = tlo;
    rep["theta_cb_upper_factorised"] = tup;
    rep["cb_identity_ok"] = identity_ok;
    json files;
    files["phi"] = out_dir + "/phi.json";
    files["psi"] = out_dir + "/psi.json";
    files["gram"] = out_dir + "/gram.json";
    files["report"] = out_dir + "/gns_report.json";
    rep["files"] = std::move(files);
    save_json(out_dir + "/gns_report.json", rep);

    std::string csv = "field,value\nreconstruction_residual," +
                      csv_double(g.reconstruction_residual) + "\ncb_identity_ok," +
                      std::string(identity_ok ? "true" : "false") + "\n";
    emit(rc, rep, csv);
    return 0;
}

// --- norms ----------------------------------------------------------------------

int cmd_norms(const RunConfig& rc, const std::string& file, const std::string& witness_out,
              const std::string& replay) {
    if (!replay.empty()) {
        json w = load_json(replay);
        TensorElement u = tensor_from_json(w.at("element"));
        const json& claims = w.at("claims");
        json rep = make_report("norms", config_json(rc));
        rep["mode"] = "replay";
        bool ok = true;
        if (w.contains("lower_witness") && !w.at("lower_witness").is_null()) {
            AdmissiblePair pair{linmap_from_json(w.at("lower_witness").at("phi")),
                                linmap_from_json(w.at("lower_witness").at("psi"))};
            const double lv = op_norm(eval_pair(pair, u));
            const double claimed = claims.at("lower").get<double>();
            rep["recomputed_lower"] = lv;
            rep["claimed_lower"] = claimed;
            rep["pair_valid"] = pair.validate().ok;
            ok = ok && std::abs(lv - claimed) <= 1e-9 && pair.validate().ok;
        }
        if (w.contains("haagerup_witness") && !w.at("haagerup_witness").is_null()) {
            const json& hj = w.at("haagerup_witness");
            const double hv = op_norm(matrix_from_json(hj.at("y"))) *
                              op_norm(matrix_from_json(hj.at("s"))) *
                              op_norm(matrix_from_json(hj.at("x")));
            const double claimed = claims.at("haagerup").get<double>();
            rep["recomputed_haagerup"] = hv;
            rep["claimed_haagerup"] = claimed;
            ok = ok && std::abs(hv - claimed) <= 1e-9;
        }
        rep["replay_ok"] = ok;
        std::string csv = "field,value\nreplay_ok," + std::string(ok ? "true" : "false") + "\n";
        emit(rc, rep, csv);
        return ok ? 0 : 3;
    }

    TensorElement u = tensor_from_json(load_json(file));
    SymConfig sc;
    sc.restarts = rc.restarts;
    sc.seed = rc.seed;
    sc.max_trunc = rc.truncation;
    sc.tol = rc.tol;
    sc.budget_ms = rc.budget_ms;
    SymNormResult r = sym_norm(u, sc);

    json rep = make_report("norms", config_json(rc));
    rep["file"] = file;
    rep["lower"] = r.lower;
    rep["upper"] = r.upper;
    rep["upper_certified"] = r.upper_certified;
    rep["lower_source"] = r.lower_source;
    rep["haagerup"] = r.haagerup.value;
    rep["plus_estimate"] = r.plus_estimate;
    json pk = json::array();
    for (double v : r.plus_by_k) pk.push_back(v);
    rep["plus_by_k"] = std::move(pk);

    if (!witness_out.empty()) {
        json w;
        w["kind"] = "sym-norm";
        w["version"] = kToolVersion;
        w["element"] = tensor_to_json(u);
        if (r.lower_witness) {
            json pj;
            pj["phi"] = linmap_to_json(r.lower_witness->phi);
            pj["psi"] = linmap_to_json(r.lower_witness->psi);
            w["lower_witness"] = std::move(pj);
        } else {
            w["lower_witness"] = nullptr;
        }
        if (r.haagerup.y.rows() > 0) {
            json hj;
            hj["y"] = matrix_to_json(r.haagerup.y);
            hj["s"] = matrix_to_json(r.haagerup.s);
            hj["x"] = matrix_to_json(r.haagerup.x);
            w["haagerup_witness"] = std::move(hj);
        } else {
            w["haagerup_witness"] = nullptr;
        }
        json claims;
        claims["lower"] = r.lower_witness ? op_norm(eval_pair(*r.lower_witness, u)) : r.lower;
        claims["haagerup"] = r.haagerup.value;
        w["claims"] = std::move(claims);
        save_json(witness_out, w);
        rep["witness_path"] = witness_out;
    }

    std::string csv = "field,value\nlower," + csv_double(r.lower) + "\nupper," +
                      csv_double(r.upper) + "\nhaagerup," + csv_double(r.haagerup.value) + "\n";
    emit(rc, rep, csv);
    return 0;
}

// --- tro-verify -------------------------------------------------------------------

int cmd_tro_verify(const RunConfig& rc, std::vector<std::string> contexts, int samples) {
    if (contexts.empty()) contexts = {"c2-m2", "r2-scalar", "m2-m2"};
    json rep = make_report("tro-verify", config_json(rc));
    json rows = json::array();
    std::string csv =
        "context,samples,max_pair_excess,max_canonical_gap,max_positive_violation,"
        "max_synthesis_residual,ok\n";
    bool all_ok = true;
    for (const std::string& name : contexts) {
        std::optional<ConcreteOpSpace> m, s;
        if (name == "c2-m2") {
            m = space_Cn(2);
            s = space_Mn(2);
        } else if (name == "r2-scalar") {
            m = space_Rn(2);
            s = scalar_middle(1);
        } else if (name == "m2-m2") {
            m = space_Mn(2);
            s = space_Mn(2);
        } else {
            throw BadRange("tro-verify: unknown context " + name +
                           " (expected c2-m2, r2-scalar, m2-m2)");
        }
        CollapseReport cr = tro_collapse_check(make_tro(*m), *s, samples, rc.seed);
        all_ok = all_ok && cr.ok;
        json row;
        row["context"] = name;
        row["samples"] = cr.samples;
        row["max_pair_excess"] = cr.max_pair_excess;
        row["max_canonical_gap"] = cr.max_canonical_gap;
        row["max_positive_violation"] = cr.max_positive_violation;
        row["max_synthesis_residual"] = cr.max_synthesis_residual;
        row["ok"] = cr.ok;
        rows.push_back(std::move(row));
        csv += name + "," + std::to_string(cr.samples) + "," + csv_double(cr.max_pair_excess) +
               "," + csv_double(cr.max_canonical_gap) + "," +
               csv_double(cr.max_positive_violation) + "," +
               csv_double(cr.max_synthesis_residual) + "," + (cr.ok ? "true" : "false") + "\n";
    }
    rep["rows"] = std::move(rows);
    rep["ok"] = all_ok;
    emit(rc, rep, csv);
    return 0;
}

// --- dual-check --------------------------------------------------------------------

int cmd_dual_check(const RunConfig& rc, std::vector<std::string> names, const std::string& file,
                   int samples) {
    json rep = make_report("dual-check", config_json(rc));
    json rows = json::array();
    std::string csv =
        "space,dim,pairing_residual,iota_rank,iota_full_rank,positivity_samples,"
        "positivity_min_eig,positivity_ok\n";
    bool all_ok = true;

    auto add = [&](const std::string& name, const ConcreteOpSpace& e) {
        DualSpace d = dual_space(e);
        CMatrix q = iota_pairing_matrix(d);
        const int rank = matrix_rank(q);
        const bool full = rank == e.dim() * e.dim();
        DualPositivityReport pos = dual_positivity_check(d, samples, rc.seed);
        all_ok = all_ok && full && pos.ok;
        json row;
        row["space"] = name;
        row["dim"] = e.dim();
        row["pairing_residual"] = d.pairing_residual;
        row["iota_rank"] = rank;
        row["iota_full_rank"] = full;
        row["positivity_samples"] = pos.samples;
        row["positivity_min_eig"] = pos.min_eigenvalue;
        row["positivity_ok"] = pos.ok;
        rows.push_back(std::move(row));
        csv += csv_escape(name) + "," + std::to_string(e.dim()) + "," +
               csv_double(d.pairing_residual) + "," + std::to_string(rank) + "," +
               (full ? "true" : "false") + "," + std::to_string(pos.samples) + "," +
               csv_double(pos.min_eigenvalue) + "," + (pos.ok ? "true" : "false") + "\n";
    };

    if (!file.empty()) add(file, space_from_json(load_json(file)));
    if (names.empty() && file.empty()) names = {"scalar", "r2", "c2"};
    for (const std::string& name : names) {
        if (name == "scalar")
            add(name, space_Mn(1));
        else if (name == "r2")
            add(name, space_Rn(2));
        else if (name == "c2")
            add(name, space_Cn(2));
        else if (name == "m2")
            add(name, space_Mn(2));
        else
            throw BadRange("dual-check: unknown space " + name +
                           " (expected scalar, r2, c2, m2)");
    }
    rep["rows"] = std::move(rows);
    rep["ok"] = all_ok;
    emit(rc, rep, csv);
    return 0;
}

// --- balanced-demo --------------------------------------------------------------------

int cmd_balanced_demo(const RunConfig& rc) {
    BalancedConfig bc;
    bc.restarts = rc.restarts;
    bc.seed = rc.seed;
    bc.budget_ms = rc.budget_ms;
    BalancedDemo demo = balanced_demo(bc);
    const double replay = op_norm(eval_pair(demo.unbalanced_pair, demo.u));
    json rep = make_report("balanced-demo", config_json(rc));
    rep["balanced_lower"] = demo.balanced.interval.lower;
    rep["balanced_upper"] = demo.balanced.interval.upper;
    rep["canonical_value"] = demo.balanced.canonical_value;
    rep["rewrites_applied"] = demo.balanced.rewrites_applied;
    rep["unbalanced_lower"] = demo.unbalanced_lower;
    rep["unbalanced_replay_residual"] = std::abs(replay - demo.unbalanced_lower);
    rep["unbalanced_pair_valid"] = demo.unbalanced_pair.validate().ok;
    rep["separation"] = demo.unbalanced_lower - demo.balanced.interval.upper;
    std::string csv = "field,value\nbalanced_upper," +
                      csv_double(demo.balanced.interval.upper) + "\nunbalanced_lower," +
                      csv_double(demo.unbalanced_lower) + "\nseparation," +
                      csv_double(demo.unbalanced_lower - demo.balanced.interval.upper) + "\n";
    emit(rc, rep, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-dimensional operator-space symmetrisation toolkit"};
    app.require_subcommand(1);

    RunConfig rc;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", rc.seed, "rng seed");
        sub->add_option("--restarts", rc.restarts, "optimizer restarts");
        sub->add_option("--truncation", rc.truncation, "plus-norm truncation maximum k");
        sub->add_option("--tol", rc.tol, "verdict tolerance");
        sub->add_option("--out", rc.out, "report format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--budget-ms", rc.budget_ms, "wall clock budget, -1 unlimited");
    };

    int code = 0;
    auto guard = [&](auto&& fn) {
        try {
            code = fn();
        } catch (const json::parse_error& ex) {
            std::cerr << "ParseError: " << ex.what() << "\n";
            code = 2;
        } catch (const BadRange& ex) {
            std::cerr << "BadRange: " << ex.what() << "\n";
            code = 2;
        } catch (const NotHermitian& ex) {
            std::cerr << "NotHermitian: " << ex.what() << "\n";
            code = 2;
        } catch (const NotPositive& ex) {
            std::cerr << "NotPositive: " << ex.what() << "\n";
            code = 2;
        } catch (const std::exception& ex) {
            std::cerr << "Error: " << ex.what() << "\n";
            code = 2;
        }
    };

    std::vector<double> ts = {0.05, 0.1, 0.2};
    CLI::App* gamma = app.add_subcommand("gamma-curve",
                                         "plus-norm curve of the rotated projection family");
    add_common(gamma);
    gamma->add_option("--t", ts, "curve parameters, each strictly inside (0, 1)");
    gamma->callback([&] { guard([&] { return cmd_gamma_curve(rc, ts); }); });

    std::string kc_file, kc_witness, kc_replay;
    CLI::App* kc = app.add_subcommand("kernel-check",
                                      "PSD verdict for a kernel file, refutation witness on failure");
    add_common(kc);
    kc->add_option("file", kc_file, "kernel JSON file");
    kc->add_option("--witness-out", kc_witness, "path for the refutation witness JSON");
    kc->add_option("--replay", kc_replay, "verify a previously emitted witness file");
    kc->callback([&] {
        guard([&] {
            if (kc_replay.empty() && kc_file.empty())
                throw BadRange("kernel-check: need a kernel file or --replay");
            return cmd_kernel_check(rc, kc_file, kc_witness, kc_replay);
        });
    });

    std::vector<std::string> dims_builtins;
    std::string dims_file;
    CLI::App* dims = app.add_subcommand("dims", "operator-system dimension obstruction report");
    add_common(dims);
    dims->add_option("--builtin", dims_builtins, "builtin spaces: D2 D3 M32 M42 C2 C3 M2");
    dims->add_option("--file", dims_file, "space JSON file");
    dims->callback([&] { guard([&] { return cmd_dims(rc, dims_builtins, dims_file); }); });

    std::string gns_file, gns_out_dir = "gns-out", gns_replay_dir;
    CLI::App* gns = app.add_subcommand("gns", "factorise a positive trilinear form");
    add_common(gns);
    gns->add_option("file", gns_file, "trilinear form JSON file")->required();
    gns->add_option("--out-dir", gns_out_dir, "directory for phi/psi/gram/report files");
    gns->add_option("--replay-dir", gns_replay_dir, "re-verify the files in this directory");
    gns->callback([&] { guard([&] { return cmd_gns(rc, gns_file, gns_out_dir, gns_replay_dir); }); });

    std::string norms_file, norms_witness, norms_replay;
    CLI::App* norms = app.add_subcommand("norms", "symmetrised norm interval of a tensor element");
    add_common(norms);
    norms->add_option("file", norms_file, "tensor element JSON file");
    norms->add_option("--witness-out", norms_witness, "path for the witness JSON");
    norms->add_option("--replay", norms_replay, "verify a previously emitted witness file");
    norms->callback([&] {
        guard([&] {
            if (norms_replay.empty() && norms_file.empty())
                throw BadRange("norms: need an element file or --replay");
            return cmd_norms(rc, norms_file, norms_witness, norms_replay);
        });
    });

    std::vector<std::string> tro_contexts;
    int tro_samples = 16;
    CLI::App* tro = app.add_subcommand("tro-verify", "balanced collapse certification");
    add_common(tro);
    tro->add_option("--context", tro_contexts, "contexts: c2-m2 r2-scalar m2-m2");
    tro->add_option("--samples", tro_samples, "sampled elements per context");
    tro->callback([&] { guard([&] { return cmd_tro_verify(rc, tro_contexts, tro_samples); }); });

    std::vector<std::string> dual_names;
    std::string dual_file;
    int dual_samples = 32;
    CLI::App* dual = app.add_subcommand("dual-check", "dual pairing positivity and surjectivity");
    add_common(dual);
    dual->add_option("--space", dual_names, "builtin spaces: scalar r2 c2 m2");
    dual->add_option("--file", dual_file, "space JSON file");
    dual->add_option("--samples", dual_samples, "positivity samples per space");
    dual->callback(
        [&] { guard([&] { return cmd_dual_check(rc, dual_names, dual_file, dual_samples); }); });

    CLI::App* bal = app.add_subcommand("balanced-demo",
                                       "balanced against plain symmetrisation separation");
    add_common(bal);
    bal->callback([&] { guard([&] { return cmd_balanced_demo(rc); }); });

    CLI11_PARSE(app, argc, argv);
    return code;
}
