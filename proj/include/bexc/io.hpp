#ifndef BEXC_IO_HPP
#define BEXC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bexc/decay.hpp"
#include "bexc/fock.hpp"
#include "bexc/lemmas.hpp"
#include "bexc/potential.hpp"

namespace bexc {

using json = nlohmann::json;

// numeric fields are printed with 12 significant digits everywhere
inline std::string format_number(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// FNV-1a 64-bit, used for config hashes and manifest checksums
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------- CSV

inline std::string csv_table(const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
    return os.str();
}

inline void write_grid_function_csv(const std::filesystem::path& path, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& value) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < x.size(); ++i) rows.push_back({x(i), value(i)});
    write_text(path, csv_table({"x", "value"}, rows));
}

inline void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    std::ostringstream os;
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_number(m(r, c));
        os << "\n";
    }
    write_text(path, os.str());
}

// -------------------------------------------- potential JSON document

inline json potential_to_json(const PairPotential& v) {
    json doc;
    doc["class"] = to_string(v.cls);
    if (v.is_bounded()) {
        json fourier = json::array();
        for (const auto& [k, vk] : v.fourier) fourier.push_back({k, vk});
        doc["fourier"] = fourier;
        doc["length"] = v.torus_length;
    } else {
        doc["lambda"] = v.lambda;
        if (v.cls != PotentialClass::Coulomb) doc["kappa"] = v.kappa;
    }
    return doc;
}

inline PairPotential potential_from_json(const json& doc) {
    PairPotential v;
    v.cls = potential_class_from_string(doc.at("class").get<std::string>());
    if (v.is_bounded()) {
        v.torus_length = doc.at("length").get<double>();
        for (const auto& kv : doc.at("fourier")) v.fourier[kv.at(0).get<int>()] = kv.at(1).get<double>();
    } else {
        v.lambda = doc.at("lambda").get<double>();
        if (doc.contains("kappa")) v.kappa = doc.at("kappa").get<double>();
    }
    return v;
}

// ------------------------------- Fock vectors: JSON header + raw doubles

inline void write_fock_vector(const std::filesystem::path& path, const FockBasis& basis,
                              const Eigen::VectorXd& amps) {
    if (amps.size() != basis.dim()) throw std::invalid_argument("write_fock_vector: size mismatch");
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    json header;
    header["m"] = basis.n_modes();
    header["M"] = basis.cutoff();
    header["ordering"] = "sector-lexicographic";
    header["count"] = basis.dim();
    const std::string h = header.dump();
    os << h << "\n";
    os.write(reinterpret_cast<const char*>(amps.data()),
             std::streamsize(sizeof(double)) * amps.size());
}

inline Eigen::VectorXd read_fock_vector(const std::filesystem::path& path, const FockBasis& basis) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(is, line);
    const json header = json::parse(line);
    if (header.at("m").get<int>() != basis.n_modes() || header.at("M").get<int>() != basis.cutoff())
        throw std::runtime_error("read_fock_vector: header does not match the basis");
    if (header.at("ordering").get<std::string>() != "sector-lexicographic")
        throw std::runtime_error("read_fock_vector: unknown ordering tag");
    Eigen::VectorXd amps(basis.dim());
    is.read(reinterpret_cast<char*>(amps.data()), std::streamsize(sizeof(double)) * amps.size());
    if (!is) throw std::runtime_error("read_fock_vector: truncated payload");
    return amps;
}

inline void write_basis_table_csv(const std::filesystem::path& path, const FockBasis& basis) {
    std::vector<std::vector<double>> rows;
    for (int l = 0; l <= basis.cutoff(); ++l)
        rows.push_back({double(l), double(basis.sector_dim(l)), double(basis.sector_begin(l))});
    write_text(path, csv_table({"sector", "dimension", "offset"}, rows));
}

// ------------------------------ sparse operators: coordinate text format

inline void write_sparse_coordinate(const std::filesystem::path& path, const SparseMat& a,
                                    const json& meta) {
    std::ostringstream os;
    json header = meta;
    header["rows"] = a.rows();
    header["cols"] = a.cols();
    header["nnz"] = a.nonZeros();
    os << header.dump() << "\n";
    for (int c = 0; c < a.outerSize(); ++c)
        for (SparseMat::InnerIterator it(a, c); it; ++it)
            os << it.row() << " " << it.col() << " " << format_number(it.value()) << "\n";
    write_text(path, os.str());
}

// ----------------------------------------------------- reports to JSON

inline json lemma_report_to_json(const LemmaReport& rep) {
    json doc;
    doc["lemma"] = rep.lemma_id;
    doc["samples"] = rep.samples;
    doc["violations"] = rep.violations;
    doc["worst_margin"] = rep.worst_margin;
    doc["empirical_constant"] = rep.empirical_constant;
    doc["seed"] = rep.seed;
    doc["parameters"] = rep.parameters;
    if (!rep.failing.empty()) {
        json f = json::array();
        for (auto [s, l] : rep.failing) f.push_back({s, l});
        doc["failing_samples"] = f;
    }
    return doc;
}

inline json certificate_to_json(const DecayCertificate& cert) {
    json doc;
    doc["L"] = cert.L;
    doc["sigma"] = cert.sigma;
    if (!std::isnan(cert.mu)) doc["mu"] = cert.mu;
    doc["ell0"] = cert.ell0;
    doc["j_range"] = {cert.j_lo, cert.j_hi};
    doc["C"] = cert.C;
    doc["epsilon"] = cert.epsilon;
    doc["verified"] = cert.verified;
    return doc;
}

inline void write_profile_csv(const std::filesystem::path& path, const DecayProfile& prof, int L) {
    std::vector<std::vector<double>> rows;
    for (int l = 0; l <= prof.max_ell(); ++l) {
        double fl = std::numeric_limits<double>::quiet_NaN();
        if (l - L >= 0 && l + L <= prof.valid_max) fl = compute_FL(prof, L, l);
        rows.push_back({double(l), prof.P(l), prof.f(l), fl});
    }
    write_text(path, csv_table({"ell", "P", "f", "F_L"}, rows));
}

// minimal SVG log-plot of P(ell) with the certificate envelope overlay
inline void write_profile_svg(const std::filesystem::path& path, const DecayProfile& prof,
                              const DecayCertificate* cert = nullptr) {
    const int W = 640, H = 420, ml = 60, mb = 40, mt = 20, mr = 20;
    double ymin = 0.0, ymax = -300.0;
    for (int l = 0; l <= prof.valid_max; ++l)
        if (prof.P(l) > 0) {
            ymin = std::min(ymin, std::log10(prof.P(l)));
            ymax = std::max(ymax, std::log10(prof.P(l)));
        }
    ymin = std::max(ymin - 1.0, -300.0);
    ymax += 1.0;
    const double xr = std::max(1, prof.valid_max);
    auto X = [&](double l) { return ml + l / xr * (W - ml - mr); };
    auto Y = [&](double logp) { return H - mb - (logp - ymin) / (ymax - ymin) * (H - mb - mt); };

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
       << "' stroke='black'/>\n";
    os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
       << "' stroke='black'/>\n";
    os << "<text x='" << W / 2 << "' y='" << H - 8 << "' font-size='13'>sector l</text>\n";
    os << "<text x='12' y='" << H / 2 << "' font-size='13' transform='rotate(-90 12 " << H / 2
       << ")'>log10 P(l)</text>\n";
    for (int l = 0; l <= prof.valid_max; ++l) {
        if (!(prof.P(l) > 0)) continue;
        os << "<circle cx='" << X(l) << "' cy='" << Y(std::log10(prof.P(l)))
           << "' r='3' fill='steelblue'/>\n";
    }
    if (cert && cert->verified) {
        os << "<polyline fill='none' stroke='crimson' stroke-dasharray='5,3' points='";
        for (int l = 0; l <= prof.valid_max; ++l) {
            const double env = std::log10(cert->C) - cert->epsilon * l / std::log(10.0);
            if (env < ymin || env > ymax) continue;
            os << X(l) << "," << Y(env) << " ";
        }
        os << "'/>\n";
    }
    os << "</svg>\n";
    write_text(path, os.str());
}

} // namespace bexc

#endif
