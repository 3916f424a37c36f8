#ifndef BEXC_CONFIG_HPP
#define BEXC_CONFIG_HPP

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bexc/grid.hpp"
#include "bexc/io.hpp"
#include "bexc/potential.hpp"

namespace bexc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_keys(const json& doc, const std::string& where,
                         const std::set<std::string>& required,
                         const std::set<std::string>& optional = {}) {
    for (const auto& key : required)
        if (!doc.contains(key))
            throw ConfigError("config: missing key '" + key + "' in " + where);
    for (const auto& [key, _] : doc.items())
        if (!required.count(key) && !optional.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
}

} // namespace detail

struct ModelConfig {
    std::string geometry = "torus"; // torus | trap
    double length = 2.0 * pi;
    int n = 64;
    std::string v_ext_type = "none"; // none | quadratic
    double v_ext_strength = 1.0;
    PairPotential potential;
};

struct ManyBodyConfig {
    int N = 50;
    int m = 6;
    int M = 14;
    std::string variant = "full"; // full | bogoliubov
};

struct SolveConfig {
    double tol = 1e-10;
    std::uint64_t seed = 1;
    int max_iter = 400;
    double hartree_tol = 1e-12;
    int hartree_max_iter = 50000;
};

struct AnalysisConfig {
    int fit_lo = 2;
    int fit_hi = 8;
    std::string fit_parity = "even"; // even | odd | all
    int certify_L_max = 10;
    double certify_sigma_min = 2.05;
    int oracle_truncation = 60;
    std::vector<std::string> lemmas = {"k1", "k2", "k3", "k4", "gap"};
    int lemma_samples = 1000;
    double lemma_delta = 0.2;
    std::uint64_t lemma_seed = 1;
    std::vector<double> kappas = {1.0, 0.5, 0.25, 0.125};
    double coulomb_lambda = 1.0;
    int tail_cut = 6;
    bool svg = true;
};

struct RunConfig {
    ModelConfig model;
    ManyBodyConfig many_body;
    SolveConfig solve;
    AnalysisConfig analyses;
    std::string output_dir = "out";
};

inline Grid1D make_grid(const ModelConfig& m) {
    return Grid1D(m.n, m.length,
                  m.geometry == "torus" ? Boundary::Periodic : Boundary::HardWall);
}

inline Eigen::VectorXd make_v_ext(const ModelConfig& m, const Grid1D& g) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g.n);
    if (m.v_ext_type == "quadratic") {
        for (int i = 0; i < g.n; ++i) {
            const double x = g.point(i) - 0.5 * g.length;
            v(i) = m.v_ext_strength * x * x;
        }
    }
    return v;
}

inline json config_to_json(const RunConfig& c) {
    json doc;
    doc["model"] = {{"geometry", c.model.geometry},
                    {"L", c.model.length},
                    {"n", c.model.n},
                    {"V_ext", {{"type", c.model.v_ext_type}, {"strength", c.model.v_ext_strength}}},
                    {"potential", potential_to_json(c.model.potential)}};
    doc["many_body"] = {{"N", c.many_body.N},
                        {"m", c.many_body.m},
                        {"M", c.many_body.M},
                        {"variant", c.many_body.variant}};
    doc["solve"] = {{"tol", c.solve.tol},
                    {"seed", c.solve.seed},
                    {"max_iter", c.solve.max_iter},
                    {"hartree_tol", c.solve.hartree_tol},
                    {"hartree_max_iter", c.solve.hartree_max_iter}};
    doc["analyses"] = {{"fit", {{"lo", c.analyses.fit_lo}, {"hi", c.analyses.fit_hi}, {"parity", c.analyses.fit_parity}}},
                       {"certify", {{"L_max", c.analyses.certify_L_max}, {"sigma_min", c.analyses.certify_sigma_min}}},
                       {"oracle_truncation", c.analyses.oracle_truncation},
                       {"lemmas", {{"which", c.analyses.lemmas},
                                   {"samples", c.analyses.lemma_samples},
                                   {"delta", c.analyses.lemma_delta},
                                   {"seed", c.analyses.lemma_seed}}},
                       {"coulomb", {{"lambda", c.analyses.coulomb_lambda}, {"kappas", c.analyses.kappas}}},
                       {"tail_cut", c.analyses.tail_cut},
                       {"svg", c.analyses.svg}};
    doc["output_dir"] = c.output_dir;
    return doc;
}

inline RunConfig config_from_json(const json& doc) {
    detail::require_keys(doc, "root", {"model", "many_body", "solve"},
                         {"analyses", "output_dir"});
    RunConfig c;

    const json& m = doc.at("model");
    detail::require_keys(m, "model", {"geometry", "L", "n", "potential"}, {"V_ext"});
    c.model.geometry = m.at("geometry").get<std::string>();
    if (c.model.geometry != "torus" && c.model.geometry != "trap")
        throw ConfigError("config: model.geometry must be 'torus' or 'trap'");
    c.model.length = m.at("L").get<double>();
    c.model.n = m.at("n").get<int>();
    if (m.contains("V_ext")) {
        detail::require_keys(m.at("V_ext"), "model.V_ext", {"type"}, {"strength"});
        c.model.v_ext_type = m.at("V_ext").at("type").get<std::string>();
        if (c.model.v_ext_type != "none" && c.model.v_ext_type != "quadratic")
            throw ConfigError("config: V_ext.type must be 'none' or 'quadratic'");
        if (m.at("V_ext").contains("strength"))
            c.model.v_ext_strength = m.at("V_ext").at("strength").get<double>();
    }
    try {
        c.model.potential = potential_from_json(m.at("potential"));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: bad potential spec: ") + e.what());
    }

    const json& mb = doc.at("many_body");
    detail::require_keys(mb, "many_body", {"N", "m", "M"}, {"variant"});
    c.many_body.N = mb.at("N").get<int>();
    c.many_body.m = mb.at("m").get<int>();
    c.many_body.M = mb.at("M").get<int>();
    if (mb.contains("variant")) c.many_body.variant = mb.at("variant").get<std::string>();
    if (c.many_body.variant != "full" && c.many_body.variant != "bogoliubov")
        throw ConfigError("config: many_body.variant must be 'full' or 'bogoliubov'");

    const json& s = doc.at("solve");
    detail::require_keys(s, "solve", {"tol", "seed"},
                         {"max_iter", "hartree_tol", "hartree_max_iter"});
    c.solve.tol = s.at("tol").get<double>();
    c.solve.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("max_iter")) c.solve.max_iter = s.at("max_iter").get<int>();
    if (s.contains("hartree_tol")) c.solve.hartree_tol = s.at("hartree_tol").get<double>();
    if (s.contains("hartree_max_iter"))
        c.solve.hartree_max_iter = s.at("hartree_max_iter").get<int>();

    if (doc.contains("analyses")) {
        const json& a = doc.at("analyses");
        detail::require_keys(a, "analyses", {},
                             {"fit", "certify", "oracle_truncation", "lemmas", "coulomb",
                              "tail_cut", "svg"});
        if (a.contains("fit")) {
            detail::require_keys(a.at("fit"), "analyses.fit", {}, {"lo", "hi", "parity"});
            if (a.at("fit").contains("lo")) c.analyses.fit_lo = a.at("fit").at("lo").get<int>();
            if (a.at("fit").contains("hi")) c.analyses.fit_hi = a.at("fit").at("hi").get<int>();
            if (a.at("fit").contains("parity"))
                c.analyses.fit_parity = a.at("fit").at("parity").get<std::string>();
        }
        if (a.contains("certify")) {
            detail::require_keys(a.at("certify"), "analyses.certify", {}, {"L_max", "sigma_min"});
            if (a.at("certify").contains("L_max"))
                c.analyses.certify_L_max = a.at("certify").at("L_max").get<int>();
            if (a.at("certify").contains("sigma_min"))
                c.analyses.certify_sigma_min = a.at("certify").at("sigma_min").get<double>();
        }
        if (a.contains("oracle_truncation"))
            c.analyses.oracle_truncation = a.at("oracle_truncation").get<int>();
        if (a.contains("lemmas")) {
            detail::require_keys(a.at("lemmas"), "analyses.lemmas", {},
                                 {"which", "samples", "delta", "seed"});
            if (a.at("lemmas").contains("which"))
                c.analyses.lemmas = a.at("lemmas").at("which").get<std::vector<std::string>>();
            if (a.at("lemmas").contains("samples"))
                c.analyses.lemma_samples = a.at("lemmas").at("samples").get<int>();
            if (a.at("lemmas").contains("delta"))
                c.analyses.lemma_delta = a.at("lemmas").at("delta").get<double>();
            if (a.at("lemmas").contains("seed"))
                c.analyses.lemma_seed = a.at("lemmas").at("seed").get<std::uint64_t>();
        }
        if (a.contains("coulomb")) {
            detail::require_keys(a.at("coulomb"), "analyses.coulomb", {}, {"lambda", "kappas"});
            if (a.at("coulomb").contains("lambda"))
                c.analyses.coulomb_lambda = a.at("coulomb").at("lambda").get<double>();
            if (a.at("coulomb").contains("kappas"))
                c.analyses.kappas = a.at("coulomb").at("kappas").get<std::vector<double>>();
        }
        if (a.contains("tail_cut")) c.analyses.tail_cut = a.at("tail_cut").get<int>();
        if (a.contains("svg")) c.analyses.svg = a.at("svg").get<bool>();
    }
    if (doc.contains("output_dir")) c.output_dir = doc.at("output_dir").get<std::string>();

    // cross-field constraints
    if (c.many_body.N <= c.many_body.M)
        throw ConfigError("config: requires N > M (got N=" + std::to_string(c.many_body.N) +
                          ", M=" + std::to_string(c.many_body.M) + ")");
    if (!(c.solve.tol > 0.0) || !(c.solve.hartree_tol > 0.0))
        throw ConfigError("config: tolerances must be positive");
    if (c.many_body.m < 1 || c.many_body.M < 0)
        throw ConfigError("config: m >= 1 and M >= 0 required");
    if (c.model.geometry == "torus" && c.model.v_ext_type == "none" && c.many_body.m % 2 != 0)
        throw ConfigError("config: homogeneous torus requires even m (momentum pairs)");
    if (c.model.n < 8) throw ConfigError("config: n >= 8 required");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return config_from_json(doc);
}

} // namespace bexc

#endif
