#include "affectsense/cli.hpp"
#include "affectsense/config.hpp"
#include "affectsense/csv.hpp"
#include "affectsense/experiment.hpp"
#include "affectsense/metrics.hpp"
#include "affectsense/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <iostream>

namespace affectsense {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> selected(const RunConfig& config, const std::string& participant) {
    if (participant.empty()) return config.participants;
    if (std::find(config.participants.begin(), config.participants.end(), participant) == config.participants.end())
        throw ConfigError("participant " + participant + " is not listed in the config");
    return {participant};
}

int cmd_ingest(const RunConfig& config, const std::string& participant, std::ostream& out) {
    CategoryMap categories;
    if (!config.app_categories.empty()) categories = load_category_map(config.app_categories);
    out << "participant,kind,files,events,row_errors,duplicates,corrupt\n";
    for (const auto& pid : selected(config, participant)) {
        IngestReport report;
        try {
            load_participant(config.data_root / pid, categories, &report);
        } catch (const FileNotFound& e) {
            throw ConfigError(e.what());
        }
        for (SensorKind kind : kAllSensorKinds) {
            const auto& s = report[kind];
            out << pid << ',' << to_string(kind) << ',' << s.files << ',' << s.events << ',' << s.row_errors << ','
                << s.duplicates << ',' << s.corrupt << '\n';
        }
    }
    return 0;
}

int cmd_features(const RunConfig& config, const std::string& participant, std::ostream& out) {
    for (const auto& pid : selected(config, participant)) {
        std::vector<DailyFeatureVector> days;
        try {
            days = extract_study_features(config, pid);
        } catch (const FileNotFound& e) {
            throw ConfigError(e.what());
        }
        write_feature_store(config.feature_file(pid), days);
        csv::write_file(config.features_root / "catalog.csv", catalog_csv());
        out << pid << ": " << days.size() << " days -> " << config.feature_file(pid).string() << '\n';
    }
    return 0;
}

int cmd_describe(const RunConfig& config, const std::string& participant, int week, const std::string& out_dir,
                 std::ostream& out) {
    const fs::path root = out_dir.empty() ? config.output_root / "descriptions" : fs::path(out_dir);
    for (const auto& pid : selected(config, participant)) {
        const auto data = load_participant_weeks(config, pid);
        if (week > 0 && !data.descriptions.count(week))
            throw ConfigError(pid + " has no complete description for week " + std::to_string(week));
        int written = 0;
        for (const auto& [w, desc] : data.descriptions) {
            if (week > 0 && w != week) continue;
            csv::write_file(root / pid / ("week_" + std::to_string(w) + ".txt"), desc.full_text + "\n");
            ++written;
            if (week > 0) out << desc.full_text << '\n';
        }
        if (week <= 0) out << pid << ": " << written << " weeks -> " << (root / pid).string() << '\n';
    }
    return 0;
}

int cmd_prompt(const RunConfig& config, const std::string& participant, int week, int shots, bool cot, int repeat,
               std::ostream& out, std::ostream& err) {
    if (shots < 0 || shots > 10) throw ConfigError("--shots must lie within 0..10");
    if (repeat < 0) throw ConfigError("--repeat must be non-negative");
    const auto data = load_participant_weeks(config, selected(config, participant).front());
    if (!data.descriptions.count(week))
        throw ConfigError(participant + " has no complete description for week " + std::to_string(week));
    ShotSchedule schedule;
    if (shots > 0) {
        const auto usable = data.usable_weeks();
        const auto plans = make_splits(data.participant_id, usable, repeat + 1, config.experiment.seed);
        const auto& plan = plans.back();
        schedule = make_shot_schedule(plan.train_week_ids, plan.seed);
        if (std::find(plan.test_week_ids.begin(), plan.test_week_ids.end(), week) == plan.test_week_ids.end()) {
            err << "note: week " << week << " is a training week in repeat " << repeat
                << "; it is left out of the examples\n";
            std::erase(schedule.order, week);
        }
    }
    const Prompt p = build_week_prompt(data, schedule, shots, week, cot, config.experiment.allow_undecided);
    out << p.text << '\n';
    return 0;
}

int cmd_run(const RunConfig& config, std::ostream& out) {
    auto backend = make_backend(config);
    const auto summary = run_experiment(config, *backend);
    for (const auto& s : summary.skipped_participants) out << "skipped participant " << s << '\n';
    for (const auto& d : summary.dropped_weeks) out << "dropped " << d << '\n';
    out << "records: " << summary.records.size() << " (" << summary.reused_records << " reused, "
        << summary.error_records << " with errors)\n";
    out << "backend calls: " << summary.new_calls << '\n';
    out << "run directory: " << config.run_dir().string() << '\n';
    return summary.exit_code();
}

nlohmann::json metrics_json(const MetricsReport& report) {
    using nlohmann::json;
    auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    json rows = json::array();
    for (const auto& r : report.rows) {
        json items = json::object();
        for (Item item : kAllItems) items[std::string(item_key(item))] = num(r.item_mae[static_cast<std::size_t>(item)]);
        rows.push_back({{"shot", r.shot},
                        {"items", items},
                        {"mean", num(r.mean)},
                        {"std", num(r.std)},
                        {"positive", num(r.positive)},
                        {"negative", num(r.negative)},
                        {"overall_mae", num(r.overall_mae)},
                        {"epsilon", num(r.epsilon)},
                        {"participants", r.participants},
                        {"records", r.records},
                        {"excluded_records", r.excluded_records},
                        {"undecided", r.undecided}});
    }
    return json{{"rows", rows}, {"total_records", report.total_records}, {"excluded_records", report.excluded_records}};
}

MetricsReport metrics_for_run(const fs::path& run) {
    try {
        return compute_metrics(read_records(run / "records.jsonl"));
    } catch (const FileNotFound& e) {
        throw ConfigError(e.what());
    }
}

int cmd_eval(const fs::path& run, std::ostream& out) {
    const auto report = metrics_for_run(run);
    csv::write_file(run / "metrics.json", metrics_json(report).dump(2) + "\n");
    out << metrics_csv(report);
    return 0;
}

int cmd_report(const fs::path& run, const std::string& out_dir, bool svg, std::ostream& out) {
    const auto report = metrics_for_run(run);
    const fs::path dir = out_dir.empty() ? run / "report" : fs::path(out_dir);
    write_report(dir, report, svg);
    out << "report written to " << dir.string() << '\n';
    return 0;
}

int cmd_synth(const SynthOptions& options, const std::string& out_dir, std::ostream& out) {
    const auto report = gen_fleet(options, out_dir);
    out << "participants: " << report.participants.size() << '\n';
    out << "files: " << report.files << '\n';
    out << "clamped targets: " << report.clamped.size() << '\n';
    for (const auto& c : report.clamped) out << "  " << c << '\n';
    out << "config: " << (fs::path(out_dir) / "config.json").string() << '\n';
    return 0;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Affect prediction from smartphone sensing with few-shot language model prompts"};
    app.name("affectsense");
    app.require_subcommand(1);

    std::string config_path = "config.json";
    std::string participant;
    int week = 0;
    int shots = 0;
    int repeat = 0;
    bool cot = false;
    bool svg = false;
    std::string run_path;
    std::string out_dir;
    SynthOptions synth;
    std::string synth_start;

    auto* ingest = app.add_subcommand("ingest", "Parse and clean raw sensor files, report counts");
    ingest->add_option("--config", config_path, "Config file");
    ingest->add_option("--participant", participant, "Only this participant");

    auto* features = app.add_subcommand("features", "Extract daily features into the feature store");
    features->add_option("--config", config_path, "Config file");
    features->add_option("--participant", participant, "Only this participant");

    auto* describe = app.add_subcommand("describe", "Write weekly textual descriptions, one file per week");
    describe->add_option("--config", config_path, "Config file");
    describe->add_option("--participant", participant, "Only this participant");
    describe->add_option("--week", week, "Only this week (1-based)");
    describe->add_option("--out", out_dir, "Output directory (default <output>/descriptions)");

    auto* prompt = app.add_subcommand("prompt", "Print a single prompt for inspection");
    prompt->add_option("--config", config_path, "Config file");
    prompt->add_option("--participant", participant, "Participant id")->required();
    prompt->add_option("--week", week, "Query week (1-based)")->required();
    prompt->add_option("--shots", shots, "Number of labeled example weeks (0-10)");
    prompt->add_flag("--cot", cot, "Ask for per-item reasoning");
    prompt->add_option("--repeat", repeat, "Split repeat the examples come from");

    auto* run = app.add_subcommand("run", "Run the full experiment described by the config");
    run->add_option("--config", config_path, "Config file");

    auto* eval = app.add_subcommand("eval", "Recompute metrics from a run directory");
    eval->add_option("--run", run_path, "Run directory")->required();

    auto* report = app.add_subcommand("report", "Write CSV, markdown and optional SVG reports for a run");
    report->add_option("--run", run_path, "Run directory")->required();
    report->add_option("--out", out_dir, "Output directory (default <run>/report)");
    report->add_flag("--svg", svg, "Also draw curves.svg");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic participant fleet");
    synth_cmd->add_option("--participants", synth.participants, "Number of participants")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth.seed, "Random seed");
    synth_cmd->add_option("--out", out_dir, "Output directory")->required();
    synth_cmd->add_option("--coupling", synth.coupling, "Label-to-feature coupling strength")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--noise", synth.noise, "Daily noise scale")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--start-date", synth_start, "First study day (YYYY-MM-DD)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    try {
        if (*synth_cmd) {
            if (!synth_start.empty()) synth.start_date = parse_date(synth_start);
            return cmd_synth(synth, out_dir, out);
        }
        if (*eval) return cmd_eval(run_path, out);
        if (*report) return cmd_report(run_path, out_dir, svg, out);

        const RunConfig config = load_config(config_path);
        if (*ingest) return cmd_ingest(config, participant, out);
        if (*features) return cmd_features(config, participant, out);
        if (*describe) return cmd_describe(config, participant, week, out_dir, out);
        if (*prompt) return cmd_prompt(config, participant, week, shots, cot, repeat, out, err);
        if (*run) return cmd_run(config, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(args, std::cout, std::cerr);
}

} // namespace affectsense
