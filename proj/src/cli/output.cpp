#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "qtk/cli.hpp"

namespace qtk::cli {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
    return buf;
}

std::string csv_escape(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char ch : f) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string to_csv(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_escape(fields[i]);
        }
        out += '\n';
    };
    line(t.header);
    for (const auto& r : t.rows) {
        if (r.size() != t.header.size()) throw std::logic_error("to_csv: row width differs from header");
        line(r);
    }
    return out;
}

std::string git_blob_sha1(const std::string& content) {
    std::string obj = "blob " + std::to_string(content.size());
    obj.push_back('\0');
    obj += content;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(obj.data(), obj.size(), md, &len, EVP_sha1(), nullptr) != 1)
        throw std::runtime_error("git_blob_sha1: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

int main_entry(int argc, char** argv) {
    CLI::App app{"Quantum thermodynamics toolkit experiment runner"};
    app.require_subcommand(1);
    std::string config_path, out_path;
    std::uint64_t seed = 0;
    int threads = 0;
    std::vector<CLI::App*> subs;
    for (const std::string& name : subcommands()) {
        CLI::App* s = app.add_subcommand(name);
        s->add_option("--config", config_path, "key=value configuration file")->required();
        s->add_option("--seed", seed, "master seed (overrides the config)");
        s->add_option("--out", out_path, "CSV output path (overrides the config)");
        s->add_option("--threads", threads, "worker threads; 0 picks the hardware count");
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    JobConfig cfg;
    try {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) throw ConfigError("cannot read config '" + config_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        std::map<std::string, std::string> overrides;
        if (sub->count("--seed")) overrides["seed"] = std::to_string(seed);
        if (sub->count("--out")) overrides["out"] = out_path;
        cfg = parse_config(name, ss.str(), overrides);
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return 2;
    }
    std::string out = cfg.string("out");
    if (out.empty()) out = name + ".csv";

    std::string csv;
    try {
        csv = to_csv(run_job(cfg, threads));
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << name << ": invalid parameters: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << name << ": numerical failure: " << e.what() << "\n";
        return 3;
    }

    try {
        write_file(out, csv);
        nlohmann::ordered_json meta;
        meta["subcommand"] = name;
        meta["config_path"] = config_path;
        meta["config_sha1"] = git_blob_sha1(cfg.text);
        meta["config"] = cfg.resolved;
        meta["csv_sha1"] = git_blob_sha1(csv);
        meta["threads"] = threads;
        write_file(out + ".meta.json", meta.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << name << ": " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace qtk::cli
