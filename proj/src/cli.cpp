#include "meetpat/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "meetpat/annealer.hpp"
#include "meetpat/baselines.hpp"
#include "meetpat/corpus.hpp"
#include "meetpat/decision_detect.hpp"
#include "meetpat/error.hpp"
#include "meetpat/generalization.hpp"
#include "meetpat/stats.hpp"
#include "meetpat/template.hpp"
#include "meetpat/wrapup.hpp"

#ifndef MEETPAT_VERSION
#define MEETPAT_VERSION "0.0.0"
#endif

namespace meetpat::cli {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/*
 * A subcommand plus a record of every option it binds, so the resolved
 * configuration (defaults included) can be written into the manifest and
 * replayed through --config.
 */
class Command {
public:
    Command(CLI::App& app, const std::string& name, const std::string& description)
        : sub_(app.add_subcommand(name, description)) {
        sub_->add_option("--out", out_, "output directory")->capture_default_str();
        sub_->add_option("--config", config_, "JSON config file or previous manifest");
    }

    template <typename T>
    CLI::Option* option(const std::string& name, T& var, const std::string& description) {
        entries_.emplace_back(name, [&var] { return json(var); });
        return sub_->add_option("--" + name, var, description)->capture_default_str();
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& description) {
        entries_.emplace_back(name, [&var] { return json(var); });
        flags_.push_back(name);
        return sub_->add_flag("--" + name, var, description);
    }

    bool is_flag(const std::string& name) const {
        return std::find(flags_.begin(), flags_.end(), name) != flags_.end();
    }

    bool knows(const std::string& name) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == name; });
    }

    json resolved() const {
        json j = json::object();
        for (const auto& [name, get] : entries_) {
            j[name] = get();
        }
        return j;
    }

    CLI::App* app() const { return sub_; }
    const std::string& out_dir() const { return out_; }
    std::function<void()> action;

private:
    CLI::App* sub_;
    std::string out_ = "out";
    std::string config_;
    std::vector<std::pair<std::string, std::function<json()>>> entries_;
    std::vector<std::string> flags_;
};

class RunContext {
public:
    RunContext(fs::path dir, std::ostream& err) : dir_(std::move(dir)), err_(err) {}

    void write(const std::string& name, const std::string& content) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
        }
        std::ofstream out(dir_ / name, std::ios::binary);
        out << content;
        if (!out) {
            throw IoError("cannot write " + (dir_ / name).string());
        }
        outputs_.push_back(name);
    }

    Corpus load_corpus(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw IoError("cannot open corpus " + path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        std::ostringstream hex;
        hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(text);
        digest_ = hex.str();
        return parse_corpus(text);
    }

    void warn(const std::string& message) { err_ << "warning: " << message << '\n'; }

    const std::vector<std::string>& outputs() const { return outputs_; }
    const std::optional<std::string>& digest() const { return digest_; }

private:
    fs::path dir_;
    std::ostream& err_;
    std::vector<std::string> outputs_;
    std::optional<std::string> digest_;
};

std::string token_of(const nlohmann::json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

// appends --key value pairs from the config file for keys absent from args
void inject_config(std::vector<std::string>& args, const Command& cmd, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config " + path);
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("config " + path + ": expected a JSON object");
    }
    if (doc.contains("subcommand") && doc["subcommand"] != cmd.app()->get_name()) {
        throw SchemaError("config " + path + " was written by subcommand " + token_of(doc["subcommand"]));
    }
    const nlohmann::json values = doc.contains("config") && doc["config"].is_object() ? doc["config"] : doc;
    if (doc.contains("config") && !doc["config"].is_object()) {
        throw SchemaError("config " + path + ": \"config\" must be an object");
    }
    std::vector<std::string> extra;
    for (const auto& [key, value] : values.items()) {
        if (key == "subcommand" || key == "out" || key == "config") {
            continue;
        }
        if (!cmd.knows(key)) {
            throw SchemaError("config " + path + ": unknown option \"" + key + "\" for " + cmd.app()->get_name());
        }
        const std::string flag = "--" + key;
        const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (given) {
            continue;
        }
        if (cmd.is_flag(key)) {
            if (!value.is_boolean()) {
                throw SchemaError("config " + path + ": \"" + key + "\" must be a boolean");
            }
            if (value.get<bool>()) {
                extra.push_back(flag);
            }
        } else if (value.is_array()) {
            if (value.empty()) {
                continue;
            }
            extra.push_back(flag);
            for (const auto& v : value) {
                extra.push_back(token_of(v));
            }
        } else if (value.is_object() || value.is_null()) {
            throw SchemaError("config " + path + ": \"" + key + "\" must be a scalar or a list");
        } else {
            extra.push_back(flag);
            extra.push_back(token_of(value));
        }
    }
    args.insert(args.end(), extra.begin(), extra.end());
}

std::vector<Label> labels_of(const Alphabet& alphabet, const std::vector<std::string>& names) {
    std::vector<Label> out;
    for (const auto& n : names) {
        out.push_back(alphabet.at(n));
    }
    return out;
}

Corpus restricted(const Corpus& corpus, const std::vector<std::string>& keep, bool collapse) {
    if (keep.empty()) {
        return restrict_corpus(corpus, corpus.alphabet.names(), collapse);
    }
    for (const auto& k : keep) {
        corpus.alphabet.at(k);
    }
    return restrict_corpus(corpus, keep, collapse);
}

BackEdge parse_back_edge(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            throw std::invalid_argument(text);
        }
        std::size_t used = 0;
        const auto from = std::stoul(text.substr(0, colon), &used);
        const auto to = std::stoul(text.substr(colon + 1));
        return {from, to};
    } catch (const std::logic_error&) {
        throw ValidationError("back edge \"" + text + "\" must look like FROM:TO");
    }
}

// act-directive, offer, accept, reject, info-request, information
const std::vector<double> kOutsideRates = {0.15, 0.10, 0.20, 0.10, 0.10, 0.35};
const std::vector<double> kInsideRates = {0.14, 0.095, 0.145, 0.08, 0.125, 0.415};

struct Options {
    // shared
    std::string corpus;
    std::uint64_t seed = 1;
    std::vector<std::string> keep;
    bool collapse = false;

    // synth-template
    std::vector<std::string> alphabet = {"A", "B", "C"};
    std::vector<std::string> nodes = {"A", "B", "C"};
    std::vector<std::string> back_edges = {"2:0"};
    std::string template_file;
    std::size_t meetings = 30;
    std::size_t length = 100;
    double noise = 0.1;

    // synth-decision
    std::size_t decision_meetings = 250;
    std::size_t window = 70;
    std::vector<double> inside = kInsideRates;
    std::vector<double> outside = kOutsideRates;
    bool no_signal = false;

    // mine
    double c1 = 1.0;
    double c2 = 0.1;
    std::string restarts = "per-meeting";
    double t0 = 1000.0;
    double cool = 0.95;
    std::size_t restart_period = 800;
    std::size_t max_accepted = 4000;
    std::size_t max_proposals = 0;
    std::size_t stall_limit = 2000;
    std::size_t max_nodes = 20;
    std::size_t max_back_edges = 5;
    std::string loss_mode = "exact";
    double delta = 0.1;
    std::size_t equivalence_len = 8;
    std::size_t threads = 0;

    // bound
    double remp = 0.0;
    std::size_t m = 1;
    std::size_t L = 1;
    std::size_t B = 0;
    std::size_t alphabet_size = 1;
    double bound_delta = 0.05;
    double loss_scale = 1.0;

    // detect / rank-features
    std::size_t folds = 15;
    std::vector<std::string> models = {"linear-svm", "logistic", "gaussian-nb", "kmeans", "em-gmm"};

    // markov / phmm
    std::size_t top_k = 4;
    std::size_t hmm_length = 3;
    double pseudocount = 1.0;
    std::size_t iterations = 50;

    // persuade / screen-words
    std::string lexicon;
    std::string stopwords;
    double alpha = 0.05;
    std::string sided = "one";
    std::size_t word_folds = 5;
};

std::set<std::string> stopword_set(const std::string& path) {
    if (!path.empty()) {
        return read_word_list(path);
    }
    const auto& words = default_stopwords();
    return {words.begin(), words.end()};
}

json table_json(const ContingencyTable2x2& t) {
    return json{{"a", t.a}, {"b", t.b}, {"c", t.c}, {"d", t.d}};
}

json fisher_json(const FisherResult& f) {
    return json{{"p_two_sided", f.p_two_sided},
                {"p_one_sided", f.p_one_sided},
                {"tail", f.tail == Tail::greater ? "greater" : "less"},
                {"p_less", f.p_less},
                {"p_greater", f.p_greater},
                {"degenerate", f.degenerate}};
}

json ranking_summary(const WordRanking& r) {
    return json{{"accuracy_mean", r.accuracy_mean},
                {"accuracy_std", r.accuracy_std},
                {"fold_accuracy", r.fold_accuracy},
                {"features", r.vocabulary.size()}};
}

void cmd_synth_template(const Options& o, RunContext& ctx) {
    const Alphabet alphabet(o.alphabet);
    Template tmpl;
    if (!o.template_file.empty()) {
        std::ifstream in(o.template_file, std::ios::binary);
        if (!in) {
            throw IoError("cannot open template " + o.template_file);
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("template " + o.template_file + ": " + e.what());
        }
        tmpl = template_from_json(j, alphabet);
    } else {
        std::vector<BackEdge> edges;
        for (const auto& e : o.back_edges) {
            edges.push_back(parse_back_edge(e));
        }
        try {
            tmpl = Template(labels_of(alphabet, o.nodes), edges);
        } catch (const ContractViolation& e) {
            throw ValidationError(e.what());
        }
    }
    const Corpus corpus = synth_template_corpus(tmpl, alphabet, o.meetings, o.length, o.noise, o.seed);
    ctx.write("corpus.jsonl", serialize_corpus(corpus));
    ctx.write("planted_template.json", template_to_json(tmpl, alphabet).dump(2) + "\n");
    ctx.write("planted_template.dot", template_to_dot(tmpl, alphabet));
}

void cmd_synth_decision(const Options& o, RunContext& ctx) {
    const auto& inside = o.no_signal ? o.outside : o.inside;
    const Corpus corpus = synth_decision_corpus(o.decision_meetings, o.window, inside, o.outside, o.seed);
    ctx.write("corpus.jsonl", serialize_corpus(corpus));
}

void cmd_mine(const Options& o, RunContext& ctx) {
    const Corpus corpus = restricted(ctx.load_corpus(o.corpus), o.keep, o.collapse);
    const auto seqs = sequences(corpus);

    AnnealConfig cfg;
    cfg.t0 = o.t0;
    cfg.cool = o.cool;
    cfg.restart_period = o.restart_period;
    cfg.max_accepted = o.max_accepted;
    cfg.max_proposals = o.max_proposals;
    cfg.stall_limit = o.stall_limit;
    cfg.max_nodes = o.max_nodes;
    cfg.max_back_edges = o.max_back_edges;
    cfg.alphabet_size = corpus.alphabet.size();
    cfg.params = {o.c1, o.c2};
    if (o.loss_mode == "exact") {
        cfg.mode = LossMode::exact();
    } else if (o.loss_mode == "windowed") {
        cfg.mode = LossMode::windowed(o.delta);
    } else {
        throw ValidationError("--loss must be exact or windowed");
    }
    cfg.seed = o.seed;

    MultiStartOptions ms;
    ms.equivalence_len = o.equivalence_len;
    ms.threads = o.threads;
    if (o.restarts != "per-meeting") {
        try {
            std::size_t used = 0;
            ms.max_starts = std::stoul(o.restarts, &used);
            if (used != o.restarts.size() || *ms.max_starts == 0) {
                throw std::invalid_argument(o.restarts);
            }
        } catch (const std::logic_error&) {
            throw ValidationError("--restarts must be per-meeting or a positive integer");
        }
    }
    const auto result = multi_start(seqs, cfg, ms);
    const auto& best = result.runs[result.best_run];

    ctx.write("template.json", template_to_json(best.best, corpus.alphabet).dump(2) + "\n");
    ctx.write("template.dot", template_to_dot(best.best, corpus.alphabet));

    std::vector<std::size_t> group_of(result.runs.size(), 0);
    json groups = json::array();
    for (std::size_t g = 0; g < result.consensus.groups.size(); ++g) {
        const auto& group = result.consensus.groups[g];
        double best_f = result.runs[group.members.front()].best_f;
        for (auto i : group.members) {
            group_of[i] = g;
            best_f = std::min(best_f, result.runs[i].best_f);
        }
        groups.push_back(json{{"size", group.members.size()},
                              {"best_f", best_f},
                              {"members", group.members},
                              {"template", json::parse(template_to_json(group.representative, corpus.alphabet).dump())}});
    }
    json consensus{{"total_runs", result.consensus.total_runs},
                   {"modal_frequency", result.consensus.modal_frequency},
                   {"best_run", result.best_run},
                   {"best_f", best.best_f},
                   {"groups", groups}};
    ctx.write("consensus.json", consensus.dump(2) + "\n");

    std::ostringstream runs;
    runs << std::setprecision(10) << "start,best_f,proposals,accepted,restarts,converged,group\n";
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& r = result.runs[i];
        runs << r.start_id << ',' << r.best_f << ',' << r.trace.proposals << ',' << r.trace.accepted_moves.size()
             << ',' << r.trace.restarts << ',' << (r.trace.converged ? 1 : 0) << ',' << group_of[i] << '\n';
    }
    ctx.write("runs.csv", runs.str());

    std::ostringstream trace;
    trace << std::setprecision(10) << "iteration,move,delta_f,temperature,best_f\n";
    for (const auto& mv : best.trace.accepted_moves) {
        trace << mv.iteration << ',' << to_string(mv.kind) << ',' << mv.delta_f << ',' << mv.temperature << ','
              << mv.best_f << '\n';
    }
    ctx.write("trace.csv", trace.str());
}

void cmd_bound(const Options& o, RunContext& ctx) {
    BoundInputs in{o.remp, o.m, o.L, o.B, o.alphabet_size, o.bound_delta, o.loss_scale};
    const double bound = risk_bound(in);
    const auto count = count_templates(o.L, o.B, o.alphabet_size);
    json j{{"inputs",
            {{"remp", o.remp},
             {"m", o.m},
             {"L", o.L},
             {"B", o.B},
             {"alphabet", o.alphabet_size},
             {"delta", o.bound_delta},
             {"loss_scale", o.loss_scale}}},
           {"log_count", count.log_count},
           {"count", count.exact ? json(to_string(*count.exact)) : json(nullptr)},
           {"bound", bound}};
    ctx.write("bound.json", j.dump(2) + "\n");
}

Dataset decision_dataset(const Options& o, RunContext& ctx) {
    const Corpus corpus = ctx.load_corpus(o.corpus);
    const auto windows = make_corpus_windows(corpus, o.window);
    if (windows.empty()) {
        throw ValidationError("corpus yields no timeframes of " + std::to_string(o.window) + " decision acts");
    }
    return to_dataset(windows);
}

void cmd_detect(const Options& o, RunContext& ctx) {
    const auto data = decision_dataset(o, ctx);
    std::vector<std::pair<ModelKind, EvalMetrics>> rows;
    for (const auto& name : o.models) {
        const auto kind = parse_model_kind(name);
        rows.emplace_back(kind, cross_validate(data.features, data.labels, kind, o.folds, o.seed));
    }
    ctx.write("metrics.csv", metrics_csv(rows));
}

void cmd_rank_features(const Options& o, RunContext& ctx) {
    const auto data = decision_dataset(o, ctx);
    const std::vector<std::string> names(kDecisionActs.begin(), kDecisionActs.end());
    const auto ranks = rank_features(data.features, data.labels, names, o.folds, o.seed);
    ctx.write("ranking.csv", ranking_csv(ranks));
}

void cmd_markov(const Options& o, RunContext& ctx) {
    const Corpus corpus = restricted(ctx.load_corpus(o.corpus), o.keep, o.collapse);
    const auto chain = fit_markov(sequences(corpus), corpus.alphabet.size());
    ctx.write("markov.csv", markov_to_csv(chain, corpus.alphabet));
    ctx.write("markov.dot", markov_to_dot(chain, corpus.alphabet));
    const auto top = top_transitions(chain, o.top_k);
    json list = json::array();
    for (const auto& t : top.transitions) {
        list.push_back(json{{"from", corpus.alphabet.name(t.from)},
                            {"to", corpus.alphabet.name(t.to)},
                            {"probability", t.probability}});
    }
    json undefined = json::array();
    for (std::size_t s = 0; s < chain.states(); ++s) {
        if (!chain.defined[s]) {
            undefined.push_back(corpus.alphabet.name(static_cast<Label>(s)));
        }
    }
    ctx.write("markov.json",
              json{{"top_transitions", list}, {"truncated", top.truncated}, {"undefined_rows", undefined}}.dump(2) +
                  "\n");
}

void cmd_phmm(const Options& o, RunContext& ctx) {
    const Corpus corpus = restricted(ctx.load_corpus(o.corpus), o.keep, o.collapse);
    const auto hmm = fit_profile_hmm(sequences(corpus), corpus.alphabet.size(), o.hmm_length, o.pseudocount,
                                     o.iterations, o.seed);
    json consensus = json::array();
    for (auto l : consensus_string(hmm)) {
        consensus.push_back(corpus.alphabet.name(l));
    }
    json emissions = json::array();
    for (Eigen::Index k = 0; k < hmm.match_emissions.rows(); ++k) {
        json row = json::array();
        for (Eigen::Index a = 0; a < hmm.match_emissions.cols(); ++a) {
            row.push_back(hmm.match_emissions(k, a));
        }
        emissions.push_back(row);
    }
    json j{{"length", hmm.length},
           {"alphabet", corpus.alphabet.names()},
           {"pseudocount", hmm.pseudocount},
           {"consensus", consensus},
           {"log_likelihood", hmm.log_likelihood},
           {"log_posterior", hmm.log_posterior},
           {"match_emissions", emissions}};
    ctx.write("phmm.json", j.dump(2) + "\n");
}

void cmd_wrapup(const Options& o, RunContext& ctx) {
    const Corpus corpus = ctx.load_corpus(o.corpus);
    const auto extracted = extract_points(corpus);
    for (const auto& w : extracted.warnings) {
        ctx.warn(w);
    }
    const auto model = fit_piecewise(extracted.points);
    std::vector<double> xs, ys;
    for (const auto& p : extracted.points) {
        xs.push_back(p.x);
        ys.push_back(p.y);
        if (p.clamped) {
            ctx.warn("meeting " + p.meeting_id + ": negative wrap-up time clamped to 0");
        }
    }
    ctx.write("points.csv", points_csv(extracted.points, model));
    ctx.write("model.json", model_json(model, fit_line(xs, ys)));
}

SuggestionMatrix suggestion_matrix(const Options& o, RunContext& ctx) {
    const Corpus corpus = ctx.load_corpus(o.corpus);
    auto matrix = tokenize_suggestions(corpus, stopword_set(o.stopwords));
    for (const auto& w : matrix.warnings) {
        ctx.warn(w);
    }
    if (matrix.suggestions() == 0) {
        throw ValidationError("corpus has no suggestions with text");
    }
    return matrix;
}

void cmd_persuade(const Options& o, RunContext& ctx) {
    if (o.lexicon.empty()) {
        throw ValidationError("--lexicon is required");
    }
    const auto lexicon = read_word_list(o.lexicon);
    const auto matrix = suggestion_matrix(o, ctx);
    const auto test = aggregate_lexicon_test(matrix, lexicon);
    if (test.fisher.degenerate) {
        ctx.warn("degenerate contingency table; p = 1 by convention");
    }
    const auto& t = test.table;
    json j{{"table", table_json(t)},
           {"with_lexicon", {{"accepted", t.a}, {"total", t.a + t.b}}},
           {"without_lexicon", {{"accepted", t.c}, {"total", t.c + t.d}}},
           {"fisher", fisher_json(test.fisher)}};
    ctx.write("lexicon_test.json", j.dump(2) + "\n");
}

void cmd_screen_words(const Options& o, RunContext& ctx) {
    Sidedness sidedness;
    if (o.sided == "one") {
        sidedness = Sidedness::one_sided;
    } else if (o.sided == "two") {
        sidedness = Sidedness::two_sided;
    } else {
        throw ValidationError("--sided must be one or two");
    }
    const auto matrix = suggestion_matrix(o, ctx);
    const auto rows = word_screen(matrix, o.alpha, sidedness);
    ctx.write("screen.csv", screen_csv(rows));

    const auto full = svm_word_ranking(matrix, o.word_folds, o.seed);
    ctx.write("ranking_full.csv", word_ranking_csv(full));
    json summary{{"suggestions", matrix.suggestions()},
                 {"vocabulary", matrix.vocabulary.size()},
                 {"screened_words", rows.size()},
                 {"full", ranking_summary(full)}};
    if (!rows.empty()) {
        const auto screened = screen_then_fit(matrix, o.alpha, o.word_folds, o.seed, sidedness);
        ctx.write("ranking_screened.csv", word_ranking_csv(screened));
        summary["screened"] = ranking_summary(screened);
    } else {
        summary["screened"] = nullptr;
    }
    ctx.write("summary.json", summary.dump(2) + "\n");
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"meetpat: macro-pattern mining and meeting analyses"};
    app.set_version_flag("--version", MEETPAT_VERSION);
    app.require_subcommand(1);

    Options o;
    std::vector<std::unique_ptr<Command>> commands;
    auto add = [&](const std::string& name, const std::string& description,
                   void (*fn)(const Options&, RunContext&)) -> Command& {
        commands.push_back(std::make_unique<Command>(app, name, description));
        Command& c = *commands.back();
        c.action = [fn, &o, &c, &out, &err, name]() {
            RunContext ctx(c.out_dir(), err);
            fn(o, ctx);
            json manifest{{"subcommand", name}, {"version", MEETPAT_VERSION}};
            const json config = c.resolved();
            manifest["seed"] = config.contains("seed") ? config["seed"] : json(nullptr);
            manifest["corpus_digest"] = ctx.digest() ? json(*ctx.digest()) : json(nullptr);
            manifest["config"] = config;
            manifest["outputs"] = ctx.outputs();
            ctx.write("manifest.json", manifest.dump(2) + "\n");
            out << "wrote " << ctx.outputs().size() << " files to " << c.out_dir() << '\n';
        };
        return c;
    };

    {
        auto& c = add("synth-template", "generate a planted-template corpus", cmd_synth_template);
        c.option("alphabet", o.alphabet, "act label names");
        c.option("nodes", o.nodes, "template node labels");
        c.option("back-edge", o.back_edges, "back edges as FROM:TO node indices");
        c.option("template", o.template_file, "template JSON file (overrides --nodes/--back-edge)");
        c.option("meetings", o.meetings, "number of meetings");
        c.option("length", o.length, "nodes per sampled instantiation");
        c.option("noise", o.noise, "per-position edit probability");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("synth-decision", "generate a decision-window corpus", cmd_synth_decision);
        c.option("meetings", o.decision_meetings, "number of meetings");
        c.option("window", o.window, "acts per block");
        c.option("inside", o.inside, "act rates inside the decision window")->expected(6);
        c.option("outside", o.outside, "act rates outside the decision window")->expected(6);
        c.flag("no-signal", o.no_signal, "use the outside rates everywhere");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("mine", "mine a template by simulated annealing", cmd_mine);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("keep", o.keep, "act labels to keep (default: all)");
        c.flag("collapse", o.collapse, "merge same-speaker repeats");
        c.option("c1", o.c1, "penalty per node");
        c.option("c2", o.c2, "penalty per back edge");
        c.option("restarts", o.restarts, "per-meeting or a number of starts");
        c.option("t0", o.t0, "initial temperature");
        c.option("cool", o.cool, "cooling factor");
        c.option("restart-period", o.restart_period, "accepted steps between restarts");
        c.option("max-accepted", o.max_accepted, "accepted steps per run");
        c.option("max-proposals", o.max_proposals, "proposals per run (0 = 10 x max-accepted)");
        c.option("stall-limit", o.stall_limit, "consecutive rejections before stopping (0 = never)");
        c.option("max-nodes", o.max_nodes, "largest template");
        c.option("max-back-edges", o.max_back_edges, "most back edges");
        c.option("loss", o.loss_mode, "exact or windowed");
        c.option("delta", o.delta, "length window fraction for windowed loss");
        c.option("equivalence-len", o.equivalence_len, "instantiation length used for consensus grouping");
        c.option("threads", o.threads, "worker threads (0 = hardware)");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("bound", "template count and generalization bound", cmd_bound);
        c.option("remp", o.remp, "empirical risk")->required();
        c.option("m", o.m, "number of meetings")->required();
        c.option("L", o.L, "maximum template length")->required();
        c.option("B", o.B, "maximum back edges")->required();
        c.option("alphabet", o.alphabet_size, "alphabet size")->required();
        c.option("delta", o.bound_delta, "confidence parameter");
        c.option("loss-scale", o.loss_scale, "loss range used in the concentration term");
    }
    {
        auto& c = add("detect", "cross-validated decision-window detection", cmd_detect);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("window", o.window, "decision acts per timeframe");
        c.option("folds", o.folds, "cross-validation folds");
        c.option("models", o.models, "models to evaluate");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("rank-features", "linear SVM ranking of dialogue acts", cmd_rank_features);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("window", o.window, "decision acts per timeframe");
        c.option("folds", o.folds, "cross-validation folds");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("markov", "first-order Markov chain", cmd_markov);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("keep", o.keep, "act labels to keep (default: all)");
        c.flag("collapse", o.collapse, "merge same-speaker repeats");
        c.option("top-k", o.top_k, "transitions to report");
    }
    {
        auto& c = add("phmm", "profile HMM consensus", cmd_phmm);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("keep", o.keep, "act labels to keep (default: all)");
        c.flag("collapse", o.collapse, "merge same-speaker repeats");
        c.option("length", o.hmm_length, "match states");
        c.option("pseudocount", o.pseudocount, "prior pseudocount");
        c.option("iterations", o.iterations, "EM iterations");
        c.option("seed", o.seed, "random seed");
    }
    {
        auto& c = add("wrapup", "piecewise linear wrap-up time model", cmd_wrapup);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
    }
    {
        auto& c = add("persuade", "aggregate lexicon Fisher test", cmd_persuade);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("lexicon", o.lexicon, "word list, one per line");
        c.option("stopwords", o.stopwords, "stopword list (default: built in)");
    }
    {
        auto& c = add("screen-words", "per-word Fisher screen and SVM word ranking", cmd_screen_words);
        c.option("corpus", o.corpus, "corpus JSONL")->required();
        c.option("alpha", o.alpha, "significance level");
        c.option("sided", o.sided, "one or two");
        c.option("folds", o.word_folds, "cross-validation folds");
        c.option("stopwords", o.stopwords, "stopword list (default: built in)");
        c.option("seed", o.seed, "random seed");
    }

    std::vector<std::string> args = raw_args;
    // --config is resolved before parsing so command-line values take precedence
    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto it = std::find_if(commands.begin(), commands.end(),
                                     [&](const auto& c) { return c->app()->get_name() == args[i]; });
        if (it == commands.end()) {
            continue;
        }
        for (std::size_t k = i + 1; k < args.size(); ++k) {
            if (args[k] == "--config" && k + 1 < args.size()) {
                inject_config(args, **it, args[k + 1]);
                break;
            }
            if (args[k].rfind("--config=", 0) == 0) {
                inject_config(args, **it, args[k].substr(9));
                break;
            }
        }
        break;
    }

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    for (const auto& c : commands) {
        if (c->app()->parsed()) {
            c->action();
        }
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParse;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return kParse;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const ContractViolation& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace meetpat::cli
