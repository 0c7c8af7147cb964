#include "affectsense/experiment.hpp"
#include "affectsense/csv.hpp"
#include "affectsense/hashing.hpp"
#include "affectsense/metrics.hpp"
#include "affectsense/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace affectsense {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<SplitPlan> make_splits(const std::string& participant_id, std::vector<int> weeks, int repeats,
                                   std::uint64_t seed) {
    std::sort(weeks.begin(), weeks.end());
    if (weeks.size() != static_cast<std::size_t>(kTrainWeeks + kTestWeeks) ||
        std::adjacent_find(weeks.begin(), weeks.end()) != weeks.end())
        throw WrongWeekCount(participant_id + ": expected 17 distinct weeks, got " + std::to_string(weeks.size()));
    std::vector<SplitPlan> plans;
    for (int r = 0; r < repeats; ++r) {
        SplitPlan plan;
        plan.participant_id = participant_id;
        plan.repeat = r;
        plan.seed = derive_seed(seed, "split/" + participant_id, static_cast<std::uint64_t>(r));
        std::vector<int> order = weeks;
        Rng rng(plan.seed);
        rng.shuffle(order);
        plan.train_week_ids.assign(order.begin(), order.begin() + kTrainWeeks);
        plan.test_week_ids.assign(order.begin() + kTrainWeeks, order.end());
        std::sort(plan.train_week_ids.begin(), plan.train_week_ids.end());
        std::sort(plan.test_week_ids.begin(), plan.test_week_ids.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

std::vector<int> ShotSchedule::shots(int k) const {
    const auto n = static_cast<std::size_t>(std::clamp(k, 0, static_cast<int>(order.size())));
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n)};
}

ShotSchedule make_shot_schedule(const std::vector<int>& train_weeks, std::uint64_t seed) {
    ShotSchedule s;
    s.order = train_weeks;
    Rng rng(derive_seed(seed, "shots"));
    rng.shuffle(s.order);
    return s;
}

// ---- labels ------------------------------------------------------------------

std::string labels_csv_header() {
    std::string h = "week_id";
    for (Item item : kAllItems) h += "," + std::string(item_key(item));
    return h;
}

LabelTable parse_labels_csv(std::string_view text) {
    const auto rows = csv::lines(text);
    if (rows.empty() || csv::trim(rows.front()) != labels_csv_header())
        throw SchemaMismatch("labels: expected header " + labels_csv_header());
    LabelTable table;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (csv::trim(rows[i]).empty()) continue;
        const auto f = csv::split(rows[i]);
        const std::string where = "line " + std::to_string(i + 1);
        if (f.size() != kItemCount + 1) {
            table.dropped.push_back(where + ": expected 11 fields");
            continue;
        }
        const auto week = csv::parse_int(csv::trim(f[0]));
        if (!week) {
            table.dropped.push_back(where + ": bad week_id");
            continue;
        }
        AffectScores s;
        std::string problem;
        for (std::size_t j = 0; j < kItemCount && problem.empty(); ++j) {
            const auto cell = csv::trim(f[j + 1]);
            const auto v = csv::parse_int(cell);
            if (cell.empty())
                problem = "missing " + std::string(item_key(kAllItems[j]));
            else if (!v || *v < 1 || *v > 5)
                problem = "invalid " + std::string(item_key(kAllItems[j]));
            else
                s.values[j] = static_cast<int>(*v);
        }
        const int w = static_cast<int>(*week);
        if (!problem.empty()) {
            table.dropped.push_back("week " + std::to_string(w) + ": " + problem);
            continue;
        }
        if (!table.complete.emplace(w, s).second) table.dropped.push_back("week " + std::to_string(w) + ": duplicate row");
    }
    return table;
}

LabelTable load_labels(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw FileNotFound("labels file not found: " + path.string());
    return parse_labels_csv(csv::read_file(path));
}

// ---- records -----------------------------------------------------------------

namespace {

json scores_json(const AffectScores& s) {
    json j = json::object();
    for (Item item : kAllItems) j[std::string(item_key(item))] = s[item];
    return j;
}

AffectScores scores_from(const json& j) {
    AffectScores s;
    for (Item item : kAllItems) s[item] = j.at(std::string(item_key(item))).get<int>();
    return s;
}

} // namespace

std::string record_to_json(const RunRecord& r) {
    json j;
    j["participant_id"] = r.participant_id;
    j["repeat"] = r.repeat;
    j["shot_count"] = r.shot_count;
    j["test_week"] = r.test_week;
    j["shot_weeks"] = r.shot_weeks;
    j["predicted"] = r.predicted ? scores_json(*r.predicted) : json(nullptr);
    j["truth"] = scores_json(r.truth);
    j["prompt_digest"] = r.prompt_digest;
    j["error"] = r.error;
    j["error_kind"] = r.error_kind;
    return j.dump();
}

RunRecord record_from_json(std::string_view line) {
    try {
        const json j = json::parse(line);
        RunRecord r;
        r.participant_id = j.at("participant_id").get<std::string>();
        r.repeat = j.at("repeat").get<int>();
        r.shot_count = j.at("shot_count").get<int>();
        r.test_week = j.at("test_week").get<int>();
        r.shot_weeks = j.value("shot_weeks", std::vector<int>{});
        if (j.contains("predicted") && !j.at("predicted").is_null()) r.predicted = scores_from(j.at("predicted"));
        r.truth = scores_from(j.at("truth"));
        r.prompt_digest = j.value("prompt_digest", "");
        r.error = j.value("error", "");
        r.error_kind = j.value("error_kind", "");
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("bad run record: ") + e.what());
    }
}

std::vector<RunRecord> read_records(const fs::path& path) {
    if (!fs::is_regular_file(path)) throw FileNotFound("records not found: " + path.string());
    std::vector<RunRecord> out;
    const auto text = csv::read_file(path);
    for (const auto line : csv::lines(text))
        if (!csv::trim(line).empty()) out.push_back(record_from_json(line));
    return out;
}

AffectScores aggregate_samples(const std::vector<AffectScores>& samples) {
    AffectScores out;
    for (std::size_t i = 0; i < kItemCount; ++i) {
        std::vector<int> decided;
        for (const auto& s : samples)
            if (s.values[i] != kUndecided) decided.push_back(s.values[i]);
        if (decided.empty()) {
            out.values[i] = kUndecided;
            continue;
        }
        std::sort(decided.begin(), decided.end());
        out.values[i] = decided[(decided.size() - 1) / 2];
    }
    return out;
}

// ---- participant data ----------------------------------------------------------

std::vector<int> ParticipantWeeks::usable_weeks() const {
    std::vector<int> out;
    for (const auto& [week, desc] : descriptions)
        if (labels.complete.count(week)) out.push_back(week);
    return out;
}

std::vector<DailyFeatureVector> extract_study_features(const RunConfig& config, const std::string& pid,
                                                       IngestReport* report) {
    CategoryMap categories;
    if (!config.app_categories.empty()) categories = load_category_map(config.app_categories);
    const auto streams = load_participant(config.data_root / pid, categories, report);
    return extract_participant_features(streams, config.study.start_date, kStudyWeeks * 7, config.study.tz_for(pid),
                                        config.features);
}

ParticipantWeeks load_participant_weeks(const RunConfig& config, const std::string& pid) {
    ParticipantWeeks data;
    data.participant_id = pid;
    std::vector<DailyFeatureVector> days;
    if (fs::is_regular_file(config.feature_file(pid))) {
        days = read_feature_store(config.feature_file(pid));
    } else {
        days = extract_study_features(config, pid);
        write_feature_store(config.feature_file(pid), days);
    }
    std::map<int, const DailyFeatureVector*> by_day; // days since study start
    for (const auto& d : days) {
        const int offset = days_between(config.study.start_date, d.date);
        by_day[offset] = &d;
    }
    for (int week = 1; week <= kStudyWeeks; ++week) {
        std::vector<DailyFeatureVector> seven;
        for (int i = 0; i < 7; ++i) {
            auto it = by_day.find((week - 1) * 7 + i);
            if (it == by_day.end()) break;
            seven.push_back(*it->second);
            seven.back().participant_id = pid;
        }
        if (seven.size() == 7) data.descriptions.emplace(week, render_week(seven, week));
    }
    data.labels = load_labels(config.labels_file(pid));
    return data;
}

Prompt build_week_prompt(const ParticipantWeeks& data, const ShotSchedule& schedule, int k, int test_week, bool cot,
                         bool allow_undecided) {
    const PromptOptions options{allow_undecided};
    const auto& query = data.descriptions.at(test_week);
    Prompt p;
    if (k == 0) {
        p = build_zero_shot(query, options);
    } else {
        std::vector<ShotExample> examples;
        for (int week : schedule.shots(k))
            examples.push_back(ShotExample{&data.descriptions.at(week), data.labels.complete.at(week), week});
        p = build_few_shot(examples, query, options);
    }
    return cot ? apply_cot(p) : p;
}

// ---- running -----------------------------------------------------------------

namespace {

struct Job {
    RecordKey key;
    std::size_t order{0};
    const ParticipantWeeks* data{nullptr};
    ShotSchedule schedule;
};

struct TranscriptLine {
    std::size_t participant_rank;
    RecordKey key;
    int sample;
    std::string text;
};

void write_atomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    csv::write_file(tmp, content);
    fs::rename(tmp, path);
}

} // namespace

RunSummary run_experiment(const RunConfig& config, Backend& backend) {
    LlmClient client(backend, config.gen, client_options(config));
    return run_experiment(config, client);
}

RunSummary run_experiment(const RunConfig& config, LlmClient& client) {
    RunSummary summary;
    const auto& ex = config.experiment;

    // Load every participant first so configuration problems surface before any call.
    std::vector<ParticipantWeeks> participants;
    for (const auto& pid : config.participants) {
        try {
            participants.push_back(load_participant_weeks(config, pid));
        } catch (const FileNotFound& e) {
            throw ConfigError(e.what());
        }
    }

    std::vector<Job> jobs;
    std::map<std::string, std::size_t> rank;
    for (std::size_t p = 0; p < participants.size(); ++p) {
        const auto& data = participants[p];
        rank[data.participant_id] = p;
        for (const auto& d : data.labels.dropped) summary.dropped_weeks.push_back(data.participant_id + " " + d);
        for (const auto& [week, labels] : data.labels.complete)
            if (!data.descriptions.count(week))
                summary.dropped_weeks.push_back(data.participant_id + " week " + std::to_string(week) +
                                                ": no sensor description");
        const auto usable = data.usable_weeks();
        if (usable.size() != static_cast<std::size_t>(kStudyWeeks)) {
            summary.skipped_participants.push_back(data.participant_id + ": " + std::to_string(usable.size()) +
                                                   " usable weeks");
            continue;
        }
        for (const auto& plan : make_splits(data.participant_id, usable, ex.repeats, ex.seed)) {
            const auto schedule = make_shot_schedule(plan.train_week_ids, plan.seed);
            for (int k = ex.shot_min; k <= ex.shot_max; ++k)
                for (int week : plan.test_week_ids)
                    jobs.push_back(Job{{data.participant_id, plan.repeat, k, week}, jobs.size(), &data, schedule});
        }
    }

    const fs::path dir = config.run_dir();
    fs::create_directories(dir);
    const fs::path records_path = dir / "records.jsonl";
    const fs::path transcripts_path = dir / "transcripts.jsonl";

    std::map<RecordKey, RunRecord> done;
    if (fs::is_regular_file(records_path))
        for (auto& r : read_records(records_path)) done[r.key()] = std::move(r);
    std::vector<TranscriptLine> transcripts;
    auto participant_rank = [&](const std::string& pid) {
        auto it = rank.find(pid);
        return it == rank.end() ? rank.size() : it->second;
    };
    if (fs::is_regular_file(transcripts_path)) {
        const auto text = csv::read_file(transcripts_path);
        for (const auto line : csv::lines(text)) {
            if (csv::trim(line).empty()) continue;
            const Transcript t = transcript_from_json(line);
            transcripts.push_back({participant_rank(t.participant_id),
                                   {t.participant_id, t.repeat, t.shot_count, t.week_id},
                                   t.sample,
                                   std::string(line)});
        }
    }

    std::vector<const Job*> pending;
    for (const auto& job : jobs) {
        auto it = done.find(job.key);
        if (it != done.end() && !it->second.call_failed()) {
            ++summary.reused_records;
            continue;
        }
        pending.push_back(&job);
    }

    std::mutex io_mutex;
    std::vector<RunRecord> fresh(pending.size());
    std::vector<std::vector<Transcript>> fresh_transcripts(pending.size());
    const long calls_before = client.backend_calls();

    auto run_job = [&](std::size_t idx) {
        const Job& job = *pending[idx];
        RunRecord rec;
        rec.participant_id = job.key.participant_id;
        rec.repeat = job.key.repeat;
        rec.shot_count = job.key.shot_count;
        rec.test_week = job.key.test_week;
        rec.truth = job.data->labels.complete.at(job.key.test_week);
        rec.shot_weeks = job.schedule.shots(job.key.shot_count);
        std::vector<Transcript> calls;
        try {
            const Prompt prompt = build_week_prompt(*job.data, job.schedule, job.key.shot_count, job.key.test_week,
                                                    ex.cot, ex.allow_undecided);
            rec.prompt_digest = hex_digest(prompt.text);
            std::vector<AffectScores> samples;
            for (int s = 0; s < ex.samples; ++s) {
                const CallContext ctx{ex.run_id, rec.participant_id, rec.test_week, rec.repeat, rec.shot_count, s};
                Transcript t = client.call(prompt.text, ctx);
                if (!config.transcript_full_prompt) t.prompt_text.clear();
                calls.push_back(t);
                if (!t.ok()) {
                    rec.error = t.error;
                    rec.error_kind = t.error_kind;
                    break;
                }
                try {
                    samples.push_back(ex.cot ? parse_cot(t.completion_text, ex.allow_undecided).scores()
                                             : parse_scores(t.completion_text, ex.allow_undecided));
                } catch (const Error& e) {
                    rec.error = e.what();
                    rec.error_kind = "parse";
                    break;
                }
            }
            if (rec.error.empty()) rec.predicted = aggregate_samples(samples);
        } catch (const Error& e) {
            rec.error = e.what();
            rec.error_kind = "prompt";
        }
        std::lock_guard lock(io_mutex);
        // Progress is appended as it happens so an interrupted run can resume.
        std::ofstream rec_out(records_path, std::ios::app | std::ios::binary);
        rec_out << record_to_json(rec) << '\n';
        std::ofstream tr_out(transcripts_path, std::ios::app | std::ios::binary);
        for (const auto& t : calls) tr_out << transcript_to_json(t) << '\n';
        fresh[idx] = std::move(rec);
        fresh_transcripts[idx] = std::move(calls);
    };

    const std::size_t workers =
        std::min<std::size_t>(pending.size(), static_cast<std::size_t>(std::max(1, config.backend.max_in_flight)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pending.size(); i = next++) run_job(i);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    summary.new_calls = client.backend_calls() - calls_before;

    for (std::size_t i = 0; i < pending.size(); ++i) {
        done[fresh[i].key()] = fresh[i];
        for (const auto& t : fresh_transcripts[i])
            transcripts.push_back({participant_rank(t.participant_id),
                                   {t.participant_id, t.repeat, t.shot_count, t.week_id},
                                   t.sample,
                                   transcript_to_json(t)});
    }

    // Canonical order: job order for records, then the same order (stable) for transcripts.
    for (const auto& job : jobs) {
        auto it = done.find(job.key);
        if (it == done.end()) continue;
        summary.records.push_back(it->second);
        if (!it->second.ok()) ++summary.error_records;
    }
    std::string records_text;
    for (const auto& r : summary.records) records_text += record_to_json(r) + "\n";
    write_atomically(records_path, records_text);

    std::stable_sort(transcripts.begin(), transcripts.end(), [](const TranscriptLine& a, const TranscriptLine& b) {
        return std::tie(a.participant_rank, a.key, a.sample) < std::tie(b.participant_rank, b.key, b.sample);
    });
    std::string transcripts_text;
    for (const auto& t : transcripts) transcripts_text += t.text + "\n";
    write_atomically(transcripts_path, transcripts_text);

    std::string log;
    for (const auto& s : summary.skipped_participants) log += "skipped participant " + s + "\n";
    for (const auto& d : summary.dropped_weeks) log += "dropped " + d + "\n";
    write_atomically(dir / "data_report.txt", log);

    write_report(dir / "report", compute_metrics(summary.records), false);
    return summary;
}

} // namespace affectsense
