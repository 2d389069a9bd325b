// csrf-lab: command-line entry point for the CSRF laboratory.

#include <csignal>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "csrflab/errors.hpp"
#include "csrflab/fixtures.hpp"
#include "csrflab/forum.hpp"
#include "csrflab/harness.hpp"
#include "csrflab/transport.hpp"

namespace {

using namespace csrflab;

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;
constexpr int kExitSetup = 2;

DefensePolicy policy_or_throw(const std::string& text) {
    auto policy = parse_policy(text);
    if (!policy) throw CLI::ValidationError("--policy", "unknown policy '" + text + "'");
    return *policy;
}

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string cell_text(const AttackOutcome* cell) {
    if (!cell) return "?";
    if (cell->setup_failed) return "SETUP";
    return cell->success ? "S" : "F(" + std::to_string(cell->http_status) + ")";
}

// Fills options not given on the command line from a CLI11-format config
// file. Keys are option names without dashes; a [serve] section is allowed.
void apply_config(CLI::App& sub, const std::string& path) {
    for (const auto& item : CLI::ConfigTOML().from_file(path)) {
        if (item.name == "++" || item.name == "--") continue;  // section markers
        if (!item.parents.empty() && item.parents != std::vector<std::string>{sub.get_name()}) {
            throw CLI::ConfigError("unexpected section '" + item.parents.front() + "' in " + path);
        }
        auto* opt = sub.get_option_no_throw("--" + item.name);
        if (!opt || item.name == "config") throw CLI::ConfigError("unknown key '" + item.name + "' in " + path);
        if (opt->count() > 0) continue;
        opt->add_result(item.inputs);
        opt->run_callback();
    }
}

void print_grid(const MatrixReport& report) {
    std::cout << std::left << std::setw(28) << "scenario";
    for (auto d : kAllPolicies) std::cout << std::setw(17) << to_string(d);
    std::cout << '\n';
    for (const auto& [id, spoof] : {std::pair{ScenarioId::A1_load_url_asset_form, false},
                                    std::pair{ScenarioId::A2_load_data, false},
                                    std::pair{ScenarioId::A3_post_url, false},
                                    std::pair{ScenarioId::A4_forged_client, false},
                                    std::pair{ScenarioId::A4_forged_client, true}}) {
        std::cout << std::setw(28) << (std::string(to_string(id)) + (spoof ? "+spoof" : ""));
        for (auto d : kAllPolicies) std::cout << std::setw(17) << cell_text(report.find(id, d, spoof));
        std::cout << '\n';
    }
}

int run_serve(const std::string& bind, std::uint16_t port, const std::string& host_name,
              const std::string& policy, std::uint64_t seed, const std::string& admin_token,
              const std::string& snapshot) {
    ForumConfig config;
    config.policy = policy_or_throw(policy);
    config.seed = seed;
    config.admin_token = admin_token;
    config.public_origin = Origin::web("http", host_name, port);
    ForumServer server(config);
    if (!snapshot.empty() && std::filesystem::exists(snapshot)) server.load_snapshot(snapshot);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpListener listener(bind, port, [&server](std::string_view raw) { return server.handle_bytes(raw); });
    std::cerr << "forum listening on " << bind << ":" << listener.port() << " as "
              << config.public_origin.serialize() << " (policy " << policy << ", seed " << seed << ")\n";

    int received = 0;
    sigwait(&signals, &received);
    listener.stop();
    if (!snapshot.empty()) {
        server.save_snapshot(snapshot);
        std::cerr << "snapshot written to " << snapshot << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CSRF laboratory: embedded-browser attacks against a vulnerable forum"};
    app.require_subcommand(1);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the forum target");
    std::string config_file;
    serve->add_option("--config", config_file, "Config file, one `key = value` per line")
        ->check(CLI::ExistingFile);
    std::string bind = "127.0.0.1";
    std::uint16_t port = 8080;
    std::string host_name = "forum.local";
    std::string serve_policy = "none";
    std::uint64_t serve_seed = 1;
    std::string admin_token = "lab-admin-token";
    std::string snapshot;
    serve->add_option("--bind", bind, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Listen port")->capture_default_str();
    serve->add_option("--host-name", host_name, "Host name of the server's own origin")->capture_default_str();
    serve->add_option("--policy", serve_policy, "none|csrf_token|origin_check|samesite_strict")
        ->capture_default_str();
    serve->add_option("--seed", serve_seed, "Session/token generator seed")->capture_default_str();
    serve->add_option("--admin-token", admin_token, "Bearer token for /admin/state")->capture_default_str();
    serve->add_option("--snapshot", snapshot, "State snapshot loaded at start, written on shutdown");

    // attack
    auto* attack = app.add_subcommand("attack", "Run one attack scenario against a fresh server");
    std::string scenario_text;
    std::string attack_policy = "none";
    bool spoof = false;
    bool attack_json = false;
    bool in_process = false;
    LabConfig lab;
    attack->add_option("--scenario", scenario_text, "A1|A2|A3|A4")->required();
    attack->add_option("--policy", attack_policy, "Defense policy")->capture_default_str();
    attack->add_flag("--spoof-origin", spoof, "A4 only: forge an Origin header matching the server");
    attack->add_flag("--json", attack_json, "Print the outcome as JSON");
    attack->add_option("--seed", lab.seed, "Generator seed")->capture_default_str();
    attack->add_flag("--in-process", in_process, "Dispatch in-process instead of loopback TCP");

    // matrix
    auto* matrix = app.add_subcommand("matrix", "Run every scenario under every defense");
    std::string json_out;
    matrix->add_option("--json", json_out, "Write the JSON report to this path ('-' for stdout)");
    matrix->add_option("--seed", lab.seed, "Generator seed")->capture_default_str();
    matrix->add_flag("--in-process", in_process, "Dispatch in-process instead of loopback TCP");

    // fixtures
    auto* fixtures_cmd = app.add_subcommand("fixtures", "Write the bundled attack and login pages");
    std::string emit_dir;
    fixtures_cmd->add_option("--emit", emit_dir, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (in_process) lab.transport = TransportKind::InProcess;

        if (*serve) {
            if (!config_file.empty()) apply_config(*serve, config_file);
            return run_serve(bind, port, host_name, serve_policy, serve_seed, admin_token, snapshot);
        }

        if (*attack) {
            auto id = parse_scenario(scenario_text);
            if (!id) {
                std::cerr << "unknown scenario '" << scenario_text << "'\n";
                return kExitSetup;
            }
            auto outcome = run_scenario(lab, *id, policy_or_throw(attack_policy), {spoof, true});
            if (attack_json) {
                std::cout << outcome_json(outcome) << '\n';
            } else {
                std::cout << to_string(outcome.scenario) << (outcome.spoof ? "+spoof" : "") << " under "
                          << to_string(outcome.defense) << ": " << (outcome.success ? "SUCCESS" : "FAILED")
                          << " (status " << outcome.http_status << ", " << outcome.notes << ")\n";
            }
            return kExitOk;
        }

        if (*matrix) {
            auto started = utc_now();
            auto report = run_matrix(lab);
            auto finished = utc_now();
            auto json = report.to_json();
            if (json_out == "-") {
                std::cout << json;
            } else {
                if (!json_out.empty()) {
                    std::ofstream out(json_out, std::ios::binary | std::ios::trunc);
                    if (!out) {
                        std::cerr << "cannot write " << json_out << '\n';
                        return kExitSetup;
                    }
                    out << json;
                }
                print_grid(report);
                std::cout << "seed " << report.seed << ", version " << report.version << ", started " << started
                          << ", finished " << finished << '\n';
            }
            if (report.has_setup_failures()) {
                for (const auto& c : report.cells) {
                    if (c.setup_failed) std::cerr << c.notes << '\n';
                }
                return kExitSetup;
            }
            auto mismatches = compare_to_expected(report);
            for (const auto& m : mismatches) std::cerr << "mismatch: " << m << '\n';
            return mismatches.empty() ? kExitOk : kExitMismatch;
        }

        if (*fixtures_cmd) {
            fixtures::emit(emit_dir);
            std::cout << "wrote " << fixtures::kAttackFormName << " and " << fixtures::kLoginPageName << " to "
                      << emit_dir << '\n';
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return kExitSetup;
    } catch (const LabError& e) {
        std::cerr << e.what() << '\n';
        return kExitSetup;
    }
    return kExitOk;
}
