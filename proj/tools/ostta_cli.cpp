// Command-line front end: single experiment runs, parameter sweeps, gradient
// checks, and synthetic EMB1 dumps.
//
// Exit codes: 0 ok, 1 check failure, 2 config error, 3 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ostta/emb1.hpp"
#include "ostta/engine.hpp"
#include "ostta/gradcheck.hpp"
#include "ostta/io.hpp"
#include "ostta/prng.hpp"
#include "ostta/prototypes.hpp"
#include "ostta/stream.hpp"

namespace {

using namespace ostta;

// Sub-seed purposes of the master seed that live outside synth_stream.
constexpr std::uint64_t kSeedPrototypes = 100;

struct Options {
    // scenario
    std::string scenario = "single";
    int dim = 64;
    int classes = 10;
    int undesired_clusters = 2;
    double ratio = 0.5;
    int samples_per_domain = 1000;
    int domains = 1;
    double shift = 0.0;
    double noise = 0.1;
    double aug = 0.05;
    double proto_gap = 0.3;
    std::uint64_t seed = 0;
    // method
    std::string method = "rosita";
    std::string identifier = "lda";
    std::string msp = "0.4,0.6,0.8";
    double lr = 0.001;
    double tau = 0.07;
    double ce_temp = 0.01;
    int k = 5;
    int warmup = 32;
    int score_bank = 512;
    int mu_capacity = 64;
    std::string ablate;  // comma list of l_re,l_d,l_u
    bool include_positive_denominator = false;
    // io
    std::string input;  // EMB1 path; empty means synthesize
    std::string out = ".";
    int window = 500;
};

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t end = s.find(',', pos);
        if (end == std::string::npos) end = s.size();
        std::string item = s.substr(pos, end - pos);
        if (!item.empty()) out.push_back(item);
        pos = end + 1;
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + ": '" + s + "'");
    }
}

long long parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + ": '" + s + "'");
    }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + ": '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw ConfigError("cannot parse " + what + ": '" + s + "' (expected 0/1)");
}

void apply_config_file(const std::string& path, Options& o) {
    const auto kv = parse_flat_config(read_file(path));
    for (const auto& [key, value] : kv) {
        if (key == "scenario") o.scenario = value;
        else if (key == "dim") o.dim = static_cast<int>(parse_int(value, key));
        else if (key == "classes") o.classes = static_cast<int>(parse_int(value, key));
        else if (key == "undesired_clusters") o.undesired_clusters = static_cast<int>(parse_int(value, key));
        else if (key == "ratio") o.ratio = parse_double(value, key);
        else if (key == "samples_per_domain") o.samples_per_domain = static_cast<int>(parse_int(value, key));
        else if (key == "domains") o.domains = static_cast<int>(parse_int(value, key));
        else if (key == "shift") o.shift = parse_double(value, key);
        else if (key == "noise") o.noise = parse_double(value, key);
        else if (key == "aug") o.aug = parse_double(value, key);
        else if (key == "proto_gap") o.proto_gap = parse_double(value, key);
        else if (key == "seed") o.seed = parse_u64(value, key);
        else if (key == "method") o.method = value;
        else if (key == "identifier") o.identifier = value;
        else if (key == "msp") o.msp = value;
        else if (key == "lr") o.lr = parse_double(value, key);
        else if (key == "tau") o.tau = parse_double(value, key);
        else if (key == "ce_temp") o.ce_temp = parse_double(value, key);
        else if (key == "k") o.k = static_cast<int>(parse_int(value, key));
        else if (key == "warmup") o.warmup = static_cast<int>(parse_int(value, key));
        else if (key == "score_bank") o.score_bank = static_cast<int>(parse_int(value, key));
        else if (key == "mu_capacity") o.mu_capacity = static_cast<int>(parse_int(value, key));
        else if (key == "ablate") o.ablate = value;
        else if (key == "include_positive_denominator")
            o.include_positive_denominator = parse_bool(value, key);
        else if (key == "input") o.input = value;
        else if (key == "out") o.out = value;
        else if (key == "window") o.window = static_cast<int>(parse_int(value, key));
        else throw ConfigError("unknown config key: " + key);
    }
}

ScenarioKind parse_scenario(const std::string& s) {
    if (s == "single") return ScenarioKind::SingleDomain;
    if (s == "continuous") return ScenarioKind::Continuous;
    if (s == "frequent") return ScenarioKind::Frequent;
    if (s == "ratio") return ScenarioKind::VaryingRatio;
    throw ConfigError("unknown scenario: " + s);
}

Method parse_method(const std::string& s) {
    if (s == "zseval") return Method::ZSEval;
    if (s == "rosita") return Method::Rosita;
    if (s == "unient") return Method::UniEnt;
    if (s == "kplus1pc") return Method::KPlusOnePC;
    throw ConfigError("unknown method: " + s);
}

IdentifierKind parse_identifier(const std::string& s) {
    if (s == "lda") return IdentifierKind::Lda;
    if (s == "daf") return IdentifierKind::Daf;
    if (s == "msp") return IdentifierKind::Msp;
    throw ConfigError("unknown identifier: " + s);
}

ScenarioConfig scenario_config(const Options& o) {
    ScenarioConfig c;
    c.kind = parse_scenario(o.scenario);
    c.dim = o.dim;
    c.num_desired_classes = o.classes;
    c.num_undesired_clusters = o.undesired_clusters;
    c.desired_ratio = o.ratio;
    c.samples_per_domain = o.samples_per_domain;
    c.num_domains = o.domains;
    c.shift_strength = o.shift;
    c.noise_sigma = o.noise;
    c.aug_sigma = o.aug;
    c.seed = o.seed;
    c.validate();
    return c;
}

MethodConfig method_config(const Options& o) {
    MethodConfig m;
    m.method = parse_method(o.method);
    m.identifier = parse_identifier(o.identifier);
    const auto msp = split_commas(o.msp);
    if (msp.size() != 3) throw ConfigError("msp expects three thresholds: tau_u,tau_t,tau_d");
    m.msp_tau_u = parse_double(msp[0], "msp");
    m.msp_tau_t = parse_double(msp[1], "msp");
    m.msp_tau_d = parse_double(msp[2], "msp");
    m.contrastive.temperature = o.tau;
    m.contrastive.ce_temperature = o.ce_temp;
    m.contrastive.k = o.k;
    m.contrastive.include_positive_in_denominator = o.include_positive_denominator;
    m.lr = o.lr;
    m.warmup = o.warmup;
    m.score_bank_capacity = o.score_bank;
    m.undesired_bank_capacity = o.mu_capacity;
    for (const std::string& a : split_commas(o.ablate)) {
        if (a == "l_re") m.enable_l_re = false;
        else if (a == "l_d") m.enable_l_d = false;
        else if (a == "l_u") m.enable_l_u = false;
        else throw ConfigError("unknown ablation target: " + a);
    }
    m.seed = o.seed;
    m.validate();
    return m;
}

std::vector<std::pair<std::string, std::string>> config_echo(const Options& o) {
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    return {
        {"scenario", o.scenario},
        {"dim", std::to_string(o.dim)},
        {"classes", std::to_string(o.classes)},
        {"undesired_clusters", std::to_string(o.undesired_clusters)},
        {"ratio", format_g9(o.ratio)},
        {"samples_per_domain", std::to_string(o.samples_per_domain)},
        {"domains", std::to_string(o.domains)},
        {"shift", format_g9(o.shift)},
        {"noise", format_g9(o.noise)},
        {"aug", format_g9(o.aug)},
        {"proto_gap", format_g9(o.proto_gap)},
        {"seed", std::to_string(o.seed)},
        {"method", o.method},
        {"identifier", o.identifier},
        {"msp", o.msp},
        {"lr", format_g9(o.lr)},
        {"tau", format_g9(o.tau)},
        {"ce_temp", format_g9(o.ce_temp)},
        {"k", std::to_string(o.k)},
        {"warmup", std::to_string(o.warmup)},
        {"score_bank", std::to_string(o.score_bank)},
        {"mu_capacity", std::to_string(o.mu_capacity)},
        {"ablate", o.ablate},
        {"include_positive_denominator", b(o.include_positive_denominator)},
        {"input", o.input},
        {"window", std::to_string(o.window)},
    };
}

std::pair<ClassPrototypeSet, std::vector<StreamSample>> make_stream(const Options& o) {
    if (!o.input.empty()) return load_embedding_dump(o.input);
    ClassPrototypeSet protos = generate_prototypes(
        o.classes, o.dim, o.proto_gap, derive_seed(o.seed, kSeedPrototypes));
    std::vector<StreamSample> stream = synth_stream(scenario_config(o), protos);
    return {std::move(protos), std::move(stream)};
}

void require_out_dir(const std::string& out) {
    if (!std::filesystem::is_directory(out))
        throw IoError("output directory does not exist: " + out);
}

void print_summary_line(const Options& o, const RunResult& r) {
    auto opt = [](const std::optional<double>& v) {
        return v ? format_g9(*v) : std::string("na");
    };
    std::printf("method=%s seed=%llu n_steps=%zu auroc=%s fpr95=%s acc_d=%s acc_u=%s hm=%s failed=%d\n",
                o.method.c_str(), static_cast<unsigned long long>(o.seed), r.records.size(),
                opt(r.summary.auroc).c_str(), opt(r.summary.fpr95).c_str(),
                opt(r.summary.acc_d).c_str(), opt(r.summary.acc_u).c_str(),
                opt(r.summary.hm).c_str(), r.failed_steps);
}

int cmd_run(const Options& o) {
    auto [protos, stream] = make_stream(o);
    if (o.window < 1) throw ConfigError("window must be >= 1");
    const MethodConfig mcfg = method_config(o);
    const RunResult result = run(stream, protos, mcfg, o.window);

    require_out_dir(o.out);
    const std::filesystem::path dir(o.out);
    write_file((dir / "steps.csv").string(), steps_csv(result.records));
    write_file((dir / "summary.json").string(),
               summary_json(result.summary, static_cast<std::int64_t>(result.records.size()),
                            o.method, o.seed, config_echo(o)));
    write_file((dir / "hist.csv").string(), hist_csv(result.histograms));
    print_summary_line(o, result);
    return 0;
}

Options apply_axis(Options o, const std::string& axis, double value) {
    if (axis == "lr") o.lr = value;
    else if (axis == "tau") o.tau = value;
    else if (axis == "k") o.k = static_cast<int>(value);
    else if (axis == "ratio") o.ratio = value;
    else if (axis == "samples_per_domain") o.samples_per_domain = static_cast<int>(value);
    else throw ConfigError("unknown sweep axis: " + axis);
    // k = 0 means pseudo-label loss only.
    if (axis == "k" && o.k == 0) {
        o.ablate = o.ablate.empty() ? "l_d,l_u" : o.ablate + ",l_d,l_u";
    }
    return o;
}

int cmd_sweep(const Options& base, const std::string& axis, const std::string& values_csv,
              int jobs) {
    const auto tokens = split_commas(values_csv);
    if (tokens.empty()) throw ConfigError("sweep: no values given");
    std::vector<double> values;
    for (const auto& t : tokens) values.push_back(parse_double(t, "sweep value"));

    // Validate every configuration up front so a bad value fails before any
    // thread starts.
    std::vector<Options> opts;
    for (double v : values) {
        Options o = apply_axis(base, axis, v);
        (void)method_config(o);
        if (o.input.empty()) (void)scenario_config(o);
        opts.push_back(std::move(o));
    }
    require_out_dir(base.out);

    std::vector<std::pair<double, MetricSummary>> rows(values.size());
    std::vector<std::int64_t> n_steps(values.size(), 0);
    std::vector<std::string> errors(values.size());

    if (jobs < 1) jobs = 1;
    jobs = std::min<int>(jobs, static_cast<int>(values.size()));
    std::vector<std::thread> workers;
    std::size_t next = 0;
    std::mutex mu;
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= values.size()) return;
                    i = next++;
                }
                try {
                    auto [protos, stream] = make_stream(opts[i]);
                    const RunResult r = run(stream, protos, method_config(opts[i]), opts[i].window);
                    rows[i] = {values[i], r.summary};
                    n_steps[i] = static_cast<std::int64_t>(r.records.size());
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        });
    }
    for (auto& t : workers) t.join();

    for (std::size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw Error("sweep value " + format_g9(values[i]) + " failed: " + errors[i]);

    const std::filesystem::path dir(base.out);
    write_file((dir / "sweep.csv").string(), sweep_csv(rows, n_steps));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto opt = [](const std::optional<double>& v) {
            return v ? format_g9(*v) : std::string("na");
        };
        std::printf("%s=%s hm=%s auroc=%s fpr95=%s\n", axis.c_str(), format_g9(values[i]).c_str(),
                    opt(rows[i].second.hm).c_str(), opt(rows[i].second.auroc).c_str(),
                    opt(rows[i].second.fpr95).c_str());
    }
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, int trials, double perturb) {
    if (trials < 1) throw ConfigError("gradcheck: trials must be >= 1");
    const GradCheckReport report = run_gradcheck(seed, trials, perturb);
    for (const auto& c : report.components)
        std::printf("component=%s max_rel_err=%s trials=%d\n", c.name.c_str(),
                    format_g9(c.max_rel_err).c_str(), c.trials);
    if (!report.all_ok()) {
        std::printf("gradcheck FAILED (tolerance %s)\n", format_g9(report.tolerance).c_str());
        return 1;
    }
    std::printf("gradcheck ok (tolerance %s)\n", format_g9(report.tolerance).c_str());
    return 0;
}

int cmd_dump_synth(const Options& o, const std::string& out_file) {
    auto [protos, stream] = make_stream(o);
    write_embedding_dump(out_file, protos, stream);
    std::printf("wrote %zu samples, %d classes, dim %d to %s\n", stream.size(),
                protos.num_classes(), protos.dim(), out_file.c_str());
    return 0;
}

void add_common_options(CLI::App* cmd, Options& o) {
    // The config file is applied by a pre-scan before CLI11 runs; this option
    // only makes the flag known to the parser.
    static std::string config_path_sink;
    cmd->add_option("--config", config_path_sink, "flat key=value config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--scenario", o.scenario, "single|continuous|frequent|ratio");
    cmd->add_option("--dim", o.dim, "embedding dimension");
    cmd->add_option("--classes", o.classes, "number of desired classes");
    cmd->add_option("--undesired-clusters", o.undesired_clusters, "undesired cluster count");
    cmd->add_option("--ratio", o.ratio, "desired sample ratio in (0,1)");
    cmd->add_option("--samples-per-domain", o.samples_per_domain,
                    "desired samples per domain (total block length for ratio scenario)");
    cmd->add_option("--domains", o.domains, "number of domains");
    cmd->add_option("--shift", o.shift, "domain shift strength");
    cmd->add_option("--noise", o.noise, "within-class noise sigma");
    cmd->add_option("--aug", o.aug, "augmented view sigma");
    cmd->add_option("--proto-gap", o.proto_gap, "min cosine gap between prototypes");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--method", o.method, "zseval|rosita|unient|kplus1pc");
    cmd->add_option("--identifier", o.identifier, "lda|daf|msp");
    cmd->add_option("--msp", o.msp, "tau_u,tau_t,tau_d for the msp identifier");
    cmd->add_option("--lr", o.lr, "adapter learning rate");
    cmd->add_option("--tau", o.tau, "contrastive temperature");
    cmd->add_option("--ce-temp", o.ce_temp, "pseudo-label CE temperature");
    cmd->add_option("--k", o.k, "neighbours per bank (0 disables L_D/L_U)");
    cmd->add_option("--warmup", o.warmup, "warm-up sample count");
    cmd->add_option("--score-bank", o.score_bank, "score bank capacity");
    cmd->add_option("--mu-capacity", o.mu_capacity, "undesired bank capacity");
    cmd->add_option("--ablate", o.ablate, "comma list of l_re,l_d,l_u to disable");
    cmd->add_flag("--include-positive-denominator", o.include_positive_denominator,
                  "add the positive to the contrastive denominator");
    cmd->add_option("--input", o.input, "EMB1 dump to run on instead of synthesizing");
    cmd->add_option("--window", o.window, "histogram window size");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;

    // The config file loads before flag parsing so flags override it.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc) {
                apply_config_file(argv[i + 1], o);
            } else if (arg.rfind("--config=", 0) == 0) {
                apply_config_file(arg.substr(9), o);
            }
        } catch (const IoError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 3;
        } catch (const ConfigError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }

    CLI::App app{"open-set single-image test-time adaptation over embeddings"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value config file")
        ->check(CLI::ExistingFile);

    auto* run_cmd = app.add_subcommand("run", "run one experiment, write steps/summary/hist");
    add_common_options(run_cmd, o);
    run_cmd->add_option("--out", o.out, "output directory (must exist)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per axis value");
    add_common_options(sweep_cmd, o);
    sweep_cmd->add_option("--out", o.out, "output directory (must exist)");
    std::string axis, values;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    sweep_cmd->add_option("--axis", axis, "lr|tau|k|ratio|samples_per_domain")->required();
    sweep_cmd->add_option("--values", values, "comma-separated axis values")->required();
    sweep_cmd->add_option("--jobs", jobs, "worker threads");

    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    std::uint64_t grad_seed = 12345;
    int grad_trials = 100;
    double grad_perturb = 0.0;
    grad_cmd->add_option("--seed", grad_seed, "seed");
    grad_cmd->add_option("--trials", grad_trials, "random configurations per component");
    grad_cmd->add_option("--perturb", grad_perturb, "corrupt one gradient entry (detector test)")
        ->group("");  // hidden

    auto* dump_cmd = app.add_subcommand("dump-synth", "write a synthetic stream as an EMB1 file");
    add_common_options(dump_cmd, o);
    std::string dump_out = "stream.emb1";
    dump_cmd->add_option("--out", dump_out, "output EMB1 file path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (const char* env = std::getenv("OSTTA_SEED")) o.seed = parse_u64(env, "OSTTA_SEED");

        if (run_cmd->parsed()) return cmd_run(o);
        if (sweep_cmd->parsed()) return cmd_sweep(o, axis, values, jobs);
        if (grad_cmd->parsed()) return cmd_gradcheck(grad_seed, grad_trials, grad_perturb);
        if (dump_cmd->parsed()) return cmd_dump_synth(o, dump_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const InvalidThresholds& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const SeparationInfeasible& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
