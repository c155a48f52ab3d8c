#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <pthread.h>

#include "CLI11.hpp"
#include "proxsim/error.hpp"
#include "proxsim/scenario.hpp"
#include "proxsim/service.hpp"
#include "proxsim/tcp.hpp"
#include "proxsim/text.hpp"

using namespace proxsim;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

scenario::RawConfig load(const std::string& path, const std::vector<std::string>& sets,
                         const std::optional<std::uint64_t>& seed) {
    auto raw = scenario::RawConfig::load(path);
    for (const auto& s : sets) raw.set(s, "--set");
    if (seed) raw.set("seed", std::to_string(*seed), "--seed");
    return raw;
}

// --out beats the environment, which beats the scenario file.
void apply_out_dir(scenario::RawConfig& raw, const std::string& out) {
    if (!out.empty()) {
        raw.set("out_dir", out, "--out");
    } else if (const char* env = std::getenv(scenario::kOutDirEnv); env && *env) {
        raw.set("out_dir", env, scenario::kOutDirEnv);
    }
}

void print_summary(const scenario::RunResult& r) {
    for (const auto& k : r.summary_order) std::cout << k << " = " << r.summary.at(k) << '\n';
}

int serve(const scenario::Scenario& sc, std::uint16_t port, const std::string& host, const std::string& tokens) {
    // Block the signals before any thread starts so only sigwait sees them.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    world::World w(world::generate_population(sc.world));
    service::Service svc(w, sc.service);
    if (!tokens.empty()) {
        std::ofstream out(tokens);
        if (!out) throw IoError("cannot write " + tokens);
        out << "user_id,token\n";
        for (const auto& u : w.users()) out << u.user_id.value << ',' << u.token << '\n';
    }
    tcp::Server server(svc, port, host);
    server.start();
    std::cout << "listening " << host << ':' << server.port() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
    std::cout << "stopped" << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proximity-service location and identity attack simulator"};
    app.require_subcommand(1);

    std::string cfg_path, out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "run a scenario and write its artifacts");
    run->add_option("config", cfg_path, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out, "output directory");
    run->add_option("--set", sets, "override a key, key=value")->allow_extra_args(false);

    std::uint16_t port = 0;
    std::string host = "127.0.0.1", tokens;
    auto* srv = app.add_subcommand("serve", "serve the scenario's world over TCP until SIGINT/SIGTERM");
    srv->add_option("config", cfg_path, "scenario file")->required();
    srv->add_option("--port", port, "port, 0 for any free port")->required();
    srv->add_option("--host", host, "IPv4 address to bind");
    srv->add_option("--tokens", tokens, "write user_id,token CSV here");
    srv->add_option("--seed", seed, "override the scenario seed");
    srv->add_option("--set", sets, "override a key, key=value")->allow_extra_args(false);

    std::string param, values;
    auto* swp = app.add_subcommand("sweep", "run the scenario once per value of one parameter");
    swp->add_option("config", cfg_path, "scenario file")->required();
    swp->add_option("--param", param, "key to sweep")->required();
    swp->add_option("--values", values, "comma-separated values")->required();
    swp->add_option("--seed", seed, "override the scenario seed");
    swp->add_option("--out", out, "output directory");
    swp->add_option("--set", sets, "override a key, key=value")->allow_extra_args(false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        auto raw = load(cfg_path, sets, seed);
        if (*run) {
            apply_out_dir(raw, out);
            const auto sc = scenario::resolve(raw);
            const auto result = scenario::run(sc);
            print_summary(result);
            std::cout << "wrote " << result.files.size() << " files to " << sc.out_dir.string() << '\n';
        } else if (*srv) {
            return serve(scenario::resolve(raw), port, host, tokens);
        } else {
            apply_out_dir(raw, out);
            const auto base = scenario::resolve(raw);
            std::vector<std::string> vals;
            for (auto v : text::split(values, ',')) vals.emplace_back(text::trim(v));
            const auto path = scenario::sweep(raw, param, vals, base.out_dir);
            std::cout << "wrote " << path.string() << '\n';
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
