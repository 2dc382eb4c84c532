#pragma once

// Run-directory artifacts: snapshot CSVs, traces, the verification report and
// the key-value manifest. Data files carry no timestamps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "rcwave/errors.hpp"
#include "rcwave/solver.hpp"
#include "rcwave/verify.hpp"

namespace rcwave {

namespace fs = std::filesystem;

/// I/O failure; the CLI maps it to exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Writes `text` to `path` through a temporary file and a rename.
inline void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out)
            throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec)
        throw IoError(fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec)
        throw IoError(fmt::format("cannot create {}: {}", p.string(), ec.message()));
}

inline std::string g17(double x) { return fmt::format("{:.17g}", x); }

inline std::string snapshot_csv(const Snapshot& s) {
    std::string out = "r,rho,u,h,w,z,c1,c2,alpha,beta\n";
    const auto& f = s.field;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto& c = f.states[i];
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", f.r[i],
                           c.rho, c.u, c.h, c.w, c.z, c.c1, c.c2, s.chars.alpha[i], s.chars.beta[i]);
    }
    return out;
}

inline std::string snapshot_name(std::size_t k) { return fmt::format("snap_{:04d}.csv", k); }

/// Rebuilds a snapshot from the r, rho, u columns; derived columns and
/// characters are recomputed.
inline Snapshot read_snapshot_csv(const fs::path& path, double t, double left_edge, const GasParams& gas) {
    std::istringstream in(read_file(path));
    std::string line;
    if (!std::getline(in, line))
        throw IoError("empty snapshot " + path.string());
    std::vector<std::string> cols;
    {
        std::stringstream hs(line);
        std::string c;
        while (std::getline(hs, c, ','))
            cols.push_back(c);
    }
    auto col = [&](const std::string& n) {
        const auto it = std::find(cols.begin(), cols.end(), n);
        if (it == cols.end())
            throw IoError(fmt::format("{}: missing column '{}'", path.string(), n));
        return static_cast<std::size_t>(it - cols.begin());
    };
    const std::size_t ir = col("r"), irho = col("rho"), iu = col("u");
    std::vector<double> r, rho, u;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string c;
        while (std::getline(ls, c, ',')) {
            try {
                vals.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw IoError(fmt::format("{}:{}: bad number '{}'", path.string(), lineno, c));
            }
        }
        if (vals.size() != cols.size())
            throw IoError(fmt::format("{}:{}: expected {} columns", path.string(), lineno, cols.size()));
        r.push_back(vals[ir]);
        rho.push_back(vals[irho]);
        u.push_back(vals[iu]);
    }
    Snapshot s;
    s.field = FlowField::from_primitive(t, r, rho, u, gas);
    s.chars = compute_character_field(s.field, gas);
    s.left_edge = left_edge;
    return s;
}

inline std::string checks_csv(const VerificationReport& rep) {
    std::string out = "check,status,worst_margin,r,t\n";
    for (const auto& c : rep.checks)
        out += fmt::format("{},{},{:.17g},{:.17g},{:.17g}\n", c.name,
                           !c.applicable ? "skipped" : (c.pass ? "pass" : "fail"), c.worst_margin, c.r, c.t);
    return out;
}

inline std::string ledger_text(const BoundLedger& L) {
    std::string out = "[ledger]\n";
    auto kv = [&](const char* k, double v) { out += fmt::format("{} = {:.17g}\n", k, v); };
    kv("b", L.b);
    kv("C0", L.hyp.C0);
    kv("M0", L.hyp.M0);
    kv("M", L.M);
    kv("rho_bar", L.hyp.rho_bar);
    kv("T", L.hyp.T);
    kv("K_hat", L.K_hat);
    kv("M_b", L.M_b);
    kv("C_b", L.C_b);
    kv("M_bar", L.M_bar);
    kv("M_bar_b", L.M_bar_b);
    kv("C_hat", L.C_hat);
    return out;
}

/// Characteristic traces with Riccati histories, one row per trace point.
inline std::string traces_csv(const std::vector<std::pair<CharacteristicTrace, RiccatiHistory>>& traces) {
    std::string out = "trace,family,t,r,field,integrated\n";
    for (std::size_t k = 0; k < traces.size(); ++k) {
        const auto& [tr, h] = traces[k];
        for (std::size_t i = 0; i < h.t.size() && i < tr.path.size(); ++i)
            out += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", k, tr.family, h.t[i], tr.path[i].r,
                               h.field[i], h.integrated[i]);
    }
    return out;
}

inline boost::property_tree::ptree read_manifest(const fs::path& dir) {
    boost::property_tree::ptree t;
    const auto p = dir / "manifest.ini";
    try {
        std::istringstream is(read_file(p));
        boost::property_tree::read_ini(is, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw IoError(fmt::format("{}: {}", p.string(), e.message()));
    }
    return t;
}

} // namespace rcwave
