// SPDX-License-Identifier: Apache-2.0

#include "ntc/config.hpp"

#include "ntc/error.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ntc {

namespace {

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "n_filters", "nonlinearity", "optimizer", "rho",  "lambda", "steps",
        "batch",     "patch_size",   "seed",      "data", "out_dir"};
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (errno != 0 || end == value.c_str() || *end != '\0')
        throw ConfigError("config: invalid numeric value for " + key + ": '" + value + "'");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (errno != 0 || end == value.c_str() || *end != '\0' || value.find('-') != std::string::npos)
        throw ConfigError("config: invalid unsigned value for " + key + ": '" + value + "'");
    return v;
}

} // namespace

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.lambda = lambda;
    t.rho = rho;
    t.optimizer = optimizer;
    t.batch = batch;
    t.steps = steps;
    t.seed = seed;
    t.patch_size = patch_size;
    return t;
}

RunConfig parse_run_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::vector<std::string> bad;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            bad.push_back("line " + std::to_string(line_no) + ": missing '='");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
            bad.push_back("unknown key '" + key + "'");
            continue;
        }
        if (kv.count(key)) bad.push_back("duplicate key '" + key + "'");
        kv[key] = value;
    }
    for (const std::string& key : known_keys())
        if (!kv.count(key)) bad.push_back("missing key '" + key + "'");
    if (!bad.empty()) {
        std::string msg = "config:";
        for (const std::string& b : bad) msg += " " + b + ";";
        throw ConfigError(msg);
    }

    RunConfig c;
    c.n_filters = parse_unsigned("n_filters", kv["n_filters"]);
    c.nonlinearity = nonlinearity_from_name(kv["nonlinearity"]);
    c.optimizer = optimizer_from_name(kv["optimizer"]);
    c.rho = parse_real("rho", kv["rho"]);
    c.lambda = parse_real("lambda", kv["lambda"]);
    c.steps = parse_unsigned("steps", kv["steps"]);
    c.batch = parse_unsigned("batch", kv["batch"]);
    c.patch_size = parse_unsigned("patch_size", kv["patch_size"]);
    c.seed = parse_unsigned("seed", kv["seed"]);
    c.data = kv["data"];
    c.out_dir = kv["out_dir"];

    std::vector<std::string> range;
    if (c.n_filters < 1) range.push_back("n_filters must be >= 1");
    if (!(c.rho > 0.0)) range.push_back("rho must be > 0");
    if (c.lambda < 0.0) range.push_back("lambda must be >= 0");
    if (c.batch < 1) range.push_back("batch must be >= 1");
    if (c.patch_size % TransformConfig::kTotalDownsampling != 0 || c.patch_size == 0)
        range.push_back("patch_size must be a positive multiple of 16");
    if (c.data.empty()) range.push_back("data must not be empty");
    if (c.out_dir.empty()) range.push_back("out_dir must not be empty");
    if (!range.empty()) {
        std::string msg = "config:";
        for (const std::string& r : range) msg += " " + r + ";";
        throw ConfigError(msg);
    }
    return c;
}

RunConfig parse_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    return parse_run_config(in);
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream out;
    out << "n_filters = " << c.n_filters << "\n";
    out << "nonlinearity = " << nonlinearity_name(c.nonlinearity) << "\n";
    out << "optimizer = " << optimizer_name(c.optimizer) << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", c.rho);
    out << "rho = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.12g", c.lambda);
    out << "lambda = " << buf << "\n";
    out << "steps = " << c.steps << "\n";
    out << "batch = " << c.batch << "\n";
    out << "patch_size = " << c.patch_size << "\n";
    out << "seed = " << c.seed << "\n";
    out << "data = " << c.data << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    return out.str();
}

namespace {

bool wildcard_match(const std::string& pattern, const std::string& text) {
    // iterative * and ? matcher
    std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

} // namespace

std::vector<std::string> expand_glob(const std::string& pattern) {
    namespace fs = std::filesystem;
    if (pattern.find('*') == std::string::npos && pattern.find('?') == std::string::npos)
        return {pattern};

    const fs::path p(pattern);
    const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
    const std::string name_pattern = p.filename().string();

    std::vector<std::string> out;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        if (wildcard_match(name_pattern, entry.path().filename().string()))
            out.push_back(entry.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace ntc
