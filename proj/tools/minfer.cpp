// Command-line front-end: inference, rule swapping, oracle cross-checks, and
// the two experiment harnesses.
//
// Exit codes: 0 success, 1 parse/usage error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "minfer/config.hpp"
#include "minfer/experiments.hpp"
#include "minfer/inference.hpp"
#include "minfer/oracle.hpp"
#include "minfer/random_instance.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw minfer::ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void dump_system_csv(const minfer::ConstraintSystem& sys, std::ostream& out) {
    out << "# C\n";
    for (std::size_t i = 0; i < sys.r; ++i) {
        for (std::size_t j = 0; j < sys.r; ++j)
            out << sys.C(i, j) << (j + 1 < sys.r ? "," : "\n");
    }
    for (const auto& [cls, b] : sys.b) {
        out << "# b[" << cls << "]\n";
        for (std::size_t i = 0; i < b.size(); ++i) out << b[i] << (i + 1 < b.size() ? "," : "\n");
    }
    out << "# w\n";
    for (std::size_t i = 0; i < sys.w.size(); ++i)
        out << sys.w[i] << (i + 1 < sys.w.size() ? "," : "\n");
}

void print_result(const minfer::InferenceResult& res, const std::string& format) {
    if (format == "json") {
        std::cout << minfer::to_json(res).dump(2) << "\n";
    } else if (format == "csv") {
        std::cout << "class,likelihood,posterior\n";
        for (const auto& [cls, like] : res.likelihoods)
            std::cout << cls << "," << like << "," << res.posterior.at(cls) << "\n";
    } else {
        for (const auto& [cls, like] : res.likelihoods)
            std::cout << "p(e|" << cls << ") = " << like
                      << "   p(" << cls << "|e) = " << res.posterior.at(cls) << "\n";
        std::cout << "argmax: " << res.argmax << "\n";
    }
}

void print_agreement(const minfer::experiments::AgreementReport& rep, const std::string& format) {
    if (format == "csv") {
        std::cout << "length,trials,agreement\n";
        for (const auto& rec : rep.per_length)
            std::cout << rec.length << "," << rec.trials << "," << rec.agreement << "\n";
        std::cout << "pooled,," << rep.pooled << "\n";
    } else if (format == "text") {
        for (const auto& rec : rep.per_length)
            std::cout << "l=" << rec.length << "  agreement=" << rec.agreement << "\n";
        std::cout << "pooled agreement: " << rep.pooled << "\n";
    } else {
        std::cout << minfer::experiments::to_json(rep).dump(2) << "\n";
    }
}

void print_led(const minfer::experiments::LedBenchmarkReport& rep, const std::string& format) {
    if (format == "csv") {
        std::cout << "noise_p,trials,accuracy,bayes_optimal,seed\n"
                  << rep.noise_p << "," << rep.trials << "," << rep.accuracy << ","
                  << rep.bayes_optimal << "," << rep.seed << "\n";
        std::cout << "confusion\n";
        for (const auto& row : rep.confusion) {
            for (std::size_t j = 0; j < row.size(); ++j)
                std::cout << row[j] << (j + 1 < row.size() ? "," : "\n");
        }
    } else if (format == "text") {
        std::cout << "noise " << rep.noise_p << ", trials " << rep.trials
                  << ": accuracy " << rep.accuracy
                  << " (Bayes optimum " << rep.bayes_optimal << ")\n";
    } else {
        std::cout << minfer::experiments::to_json(rep).dump(2) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian inference from marginal rule constraints"};
    app.require_subcommand(1);

    minfer::Config cfg;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", cfg.seed, "RNG seed");
    app.add_option("--format", cfg.format, "Output format: json|csv|text");

    // infer
    std::string rule_path, evidence_path;
    bool dump_system = false;
    auto* infer = app.add_subcommand("infer", "Classify one evidence against a rule base");
    infer->fallthrough();
    infer->add_option("rules", rule_path, "Rule file (JSON)")->required();
    infer->add_option("evidence", evidence_path, "Evidence file (JSON)")->required();
    infer->add_flag("--dump-system", dump_system, "Dump C, b, w as CSV");

    // swap
    std::string swap_script_path;
    bool verify = false;
    auto* swap = app.add_subcommand("swap", "Apply a scripted sequence of rule exchanges");
    swap->fallthrough();
    swap->add_option("rules", rule_path, "Rule file (JSON)")->required();
    swap->add_option("evidence", evidence_path, "Evidence file (JSON)")->required();
    swap->add_option("script", swap_script_path, "Swap script: JSON array of {index, rule}")
        ->required();
    swap->add_flag("--verify", verify, "Compare each step against a from-scratch rebuild");

    // oracle-check
    std::size_t oc_n = 10, oc_r = 8, oc_trials = 1000;
    bool oc_duplicates = false;
    auto* oracle_check = app.add_subcommand("oracle-check", "Fast path vs explicit oracle");
    oracle_check->fallthrough();
    oracle_check->add_option("--n", oc_n, "Max attribute count");
    oracle_check->add_option("--r", oc_r, "Max rule count");
    oracle_check->add_option("--trials", oc_trials, "Random instances");
    oracle_check->add_flag("--duplicates", oc_duplicates, "Force duplicate rules (singular C)");

    // study-agreement
    std::vector<std::size_t> lengths;
    std::size_t ag_trials = 100000;
    auto* study = app.add_subcommand("study-agreement", "Sign-agreement simulation");
    study->fallthrough();
    study->add_option("--lengths", lengths, "Distribution lengths (default 4..16384 powers of 2)")
        ->delimiter(',');
    study->add_option("--trials", ag_trials, "Pairs per length");

    // bench-led
    double noise_p = 0.10;
    std::size_t led_trials = 50000, estimate_samples = 0;
    auto* bench = app.add_subcommand("bench-led", "Noisy LED digit benchmark");
    bench->fallthrough();
    bench->add_option("--noise", noise_p, "Per-segment flip probability");
    bench->add_option("--trials", led_trials, "Classification trials");
    bench->add_option("--estimate-from-samples", estimate_samples,
                      "Estimate rule marginals from N samples per digit instead of the analytic channel");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the usage error
        return code == 0 ? 0 : 1;
    }

    try {
        if (!config_path.empty()) {
            auto file_cfg = minfer::parse_config(slurp(config_path));
            // explicit flags win over the config file
            if (app.count("--seed") == 0) cfg.seed = file_cfg.seed;
            if (app.count("--format") == 0) cfg.format = file_cfg.format;
            cfg.tolerances = file_cfg.tolerances;
            cfg.n_limit = file_cfg.n_limit;
        }
        cfg.validate();

        if (*infer) {
            const auto rb = minfer::parse_rulebase(slurp(rule_path));
            const auto ev = minfer::parse_evidence(slurp(evidence_path), rb.attributes);
            minfer::Engine engine(rb, ev, cfg.tolerances, cfg.n_limit);
            if (dump_system) dump_system_csv(engine.system(), std::cout);
            print_result(engine.classify(), cfg.format);
        } else if (*swap) {
            const auto rb = minfer::parse_rulebase(slurp(rule_path));
            const auto ev = minfer::parse_evidence(slurp(evidence_path), rb.attributes);
            minfer::Engine engine(rb, ev, cfg.tolerances, cfg.n_limit);
            const auto script = nlohmann::json::parse(slurp(swap_script_path));
            minfer::RuleBase scratch = rb; // tracks the swapped base for --verify
            for (const auto& step : script) {
                const std::size_t index = step.at("index").get<std::size_t>();
                const auto rule = minfer::rule_from_json(step.at("rule"), rb.attributes);
                const auto res = engine.swap_rule(index, rule);
                nlohmann::json out = minfer::to_json(res);
                out["swapped_index"] = index;
                if (verify) {
                    // from-scratch rebuild of the same swapped firing set
                    auto firing_ids = minfer::firing_rules(scratch.rules, ev);
                    scratch.rules[firing_ids.at(index)] = rule;
                    minfer::Engine rebuilt(scratch, ev, cfg.tolerances, cfg.n_limit);
                    double max_delta = 0.0;
                    for (const auto& [cls, like] : res.likelihoods)
                        max_delta = std::max(max_delta,
                                             std::abs(like - rebuilt.likelihood(cls)));
                    out["rebuild_delta"] = max_delta;
                }
                std::cout << out.dump(2) << "\n";
            }
        } else if (*oracle_check) {
            minfer::experiments::Rng rng(cfg.seed);
            double max_delta = 0.0;
            for (std::size_t t = 0; t < oc_trials; ++t) {
                const auto inst = minfer::random_instance(oc_n, oc_r, rng, oc_duplicates);
                minfer::Engine engine(inst.rb, inst.evidence, cfg.tolerances, cfg.n_limit);
                const auto a = minfer::oracle::materialize_A(engine.firing(),
                                                             inst.rb.attributes.size());
                for (const auto& cls : inst.rb.classes.classes) {
                    const double fast = engine.likelihood(cls);
                    const double exact = minfer::oracle::exact_inference(
                        a, minfer::build_b(engine.firing(), cls));
                    max_delta = std::max(max_delta, std::abs(fast - exact));
                }
            }
            const bool pass = max_delta <= 1e-9;
            std::cout << (pass ? "PASS" : "FAIL") << " max |fast - oracle| = " << max_delta
                      << " over " << oc_trials << " instances\n";
            return pass ? 0 : 2;
        } else if (*study) {
            if (lengths.empty())
                for (std::size_t l = 4; l <= 16384; l *= 2) lengths.push_back(l);
            const auto rep = minfer::experiments::agreement_study(lengths, ag_trials, cfg.seed);
            print_agreement(rep, cfg.format);
        } else if (*bench) {
            const auto rep = minfer::experiments::led_benchmark(
                led_trials, noise_p, cfg.seed, cfg.tolerances, estimate_samples);
            print_led(rep, cfg.format);
        }
    } catch (const minfer::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
