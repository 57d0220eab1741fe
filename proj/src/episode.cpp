#include <pwab/benchgen.hpp>
#include <pwab/eval.hpp>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

namespace pwab::eval {

namespace {

struct Grading {
    std::optional<GradedCall> graded;
    int function_acc = 0;
    double result_acc = 0.0;
    double last = 0.0;
    double best = 0.0;
    double outcome = 0.0;
    std::vector<double> per_call;
};

Grading grade(const std::vector<GradedCall>& task_calls, const corpus::Instruction& ins,
              const retrieval::Embedder& embedder, GradingRule rule) {
    Grading g;
    std::vector<webenv::RankedList> lists;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < task_calls.size(); ++i) {
        const auto& c = task_calls[i];
        const double r = result_accuracy(c, ins, embedder);
        g.per_call.push_back(r);
        if (i == 0 || r > g.best) {
            g.best = r;
            best_index = i;
        }
        if (c.accepted && c.result) {
            if (const auto* list = c.result->ranked()) lists.push_back(*list);
        }
    }
    if (task_calls.empty()) return g;
    g.last = g.per_call.back();
    g.graded = rule == GradingRule::last_call ? task_calls.back() : task_calls[best_index];
    g.function_acc = function_accuracy(g.graded, ins.task_kind);
    g.result_acc = rule == GradingRule::last_call ? g.last : g.best;
    g.outcome = ins.task_kind == corpus::TaskKind::review ? g.result_acc
                                                          : outcome_accuracy(lists, ins.ground_truth);
    return g;
}

void apply(EpisodeRecord& rec, const Grading& g) {
    if (g.graded) rec.graded_call = g.graded->call;
    rec.function_acc = g.function_acc;
    rec.result_acc = g.result_acc;
    rec.last_call_result_acc = g.last;
    rec.best_call_result_acc = g.best;
    rec.outcome_acc = g.outcome;
    rec.per_call_result_acc = g.per_call;
}

EpisodeRecord start_record(const corpus::Instruction& ins, agent::Track track) {
    EpisodeRecord rec;
    rec.instruction_id = ins.instruction_id;
    rec.user_id = ins.user_id;
    rec.task_kind = ins.task_kind;
    rec.track = track;
    return rec;
}

bool is_task_call(const webenv::FunctionCall& call) {
    const auto kind = webenv::parse_function_kind(call.name);
    return kind && webenv::is_task_tool(*kind);
}

struct Dispatched {
    GradedCall graded;
    std::string observation;
    std::string error;
};

Dispatched dispatch(webenv::EnvState& env, const webenv::FunctionCall& call) {
    Dispatched d;
    d.graded.call = call;
    try {
        auto result = env.dispatch(call);
        d.observation = webenv::result_to_json(result, env.catalog()).dump();
        d.graded.accepted = true;
        d.graded.result = std::move(result);
    } catch (const webenv::UnknownFunctionError& e) {
        d.error = e.what();
    } catch (const webenv::MalformedParametersError& e) {
        d.error = e.what();
    }
    if (!d.error.empty()) d.observation = nlohmann::json{{"error", d.error}}.dump();
    return d;
}

}  // namespace

// --- simulators --------------------------------------------------------------

ScriptedSimulator::ScriptedSimulator(std::vector<std::string> replies, std::optional<std::string> fallback)
    : replies_(std::move(replies)), fallback_(std::move(fallback)) {}

std::string ScriptedSimulator::reply(const corpus::Instruction&, const std::vector<agent::TranscriptTurn>&,
                                     const std::string&) {
    if (next_ < replies_.size()) return replies_[next_++];
    if (fallback_) return *fallback_;
    throw agent::QueueExhaustedError("scripted simulator has no replies left");
}

PolicySimulator::PolicySimulator(std::shared_ptr<agent::Policy> policy, const corpus::DatasetBundle& bundle,
                                 agent::Sampling sampling)
    : policy_(std::move(policy)), bundle_(bundle), sampling_(sampling) {
    if (!policy_) throw InvalidArgument("PolicySimulator: null policy");
}

std::string PolicySimulator::system_prompt(const corpus::Instruction& ins,
                                           const corpus::DatasetBundle& bundle) {
    const auto* user = bundle.find_user(ins.user_id);
    if (!user) throw ValidationError("instruction " + ins.instruction_id + " has unknown user");
    const auto& product_id = ins.task_kind == corpus::TaskKind::review ? ins.product_id.value_or("")
                                                                       : ins.ground_truth;
    std::string review_block;
    if (ins.task_kind == corpus::TaskKind::review) {
        review_block = "\nThe review you have in mind:\n\n" + ins.ground_truth + "\n";
    }
    return benchgen::render_prompt(benchgen::TemplateId::user_simulator,
                                   {{"PROFILE", benchgen::format_profile(user->profile)},
                                    {"PRODUCT", benchgen::format_product(bundle.catalog.at(product_id))},
                                    {"REVIEW_BLOCK", review_block}});
}

std::string PolicySimulator::reply(const corpus::Instruction& ins,
                                   const std::vector<agent::TranscriptTurn>& transcript,
                                   const std::string& agent_message) {
    // From the simulated user's side the agent speaks as "user" and the
    // simulator's own earlier replies are "assistant" turns.
    std::vector<agent::ChatMessage> messages = {{agent::Role::system, system_prompt(ins, bundle_)},
                                                {agent::Role::assistant, ins.text}};
    for (const auto& t : transcript) {
        if (t.role == agent::Role::assistant) messages.push_back({agent::Role::user, t.content});
        if (t.role == agent::Role::user) messages.push_back({agent::Role::assistant, t.content});
    }
    messages.push_back({agent::Role::user, agent_message});
    auto text = policy_->complete(messages, 1, sampling_).front();
    const auto nl = text.find('\n');
    return nl == std::string::npos ? text : text.substr(0, nl);
}

// --- runners -------------------------------------------------------------------

EpisodeRecord run_single_turn(agent::Policy& policy, const corpus::Instruction& ins, webenv::EnvState& env,
                              std::string_view memory_text, const retrieval::Embedder& embedder,
                              const EpisodeOptions& options) {
    auto rec = start_record(ins, agent::Track::single);
    rec.steps = 1;
    const auto messages = agent::assemble_prompt(agent::Track::single, ins, memory_text,
                                                 webenv::tool_schemas(false), {}, options.variant);
    std::string text;
    try {
        text = policy.complete(messages, 1, options.sampling).front();
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.steps = 0;
        return rec;
    }
    auto action = agent::parse_tool_call(text, options.variant);
    if (auto* failure = std::get_if<agent::ParseFailure>(&action)) {
        rec.transcript.push_back({"agent", failure->raw, std::nullopt, true, false, {}});
        rec.termination = Termination::parse_failure;
        return rec;
    }
    const auto& call = std::get<webenv::FunctionCall>(action);
    auto d = dispatch(env, call);
    rec.transcript.push_back({"agent", text, call, false, d.graded.accepted, d.error});
    rec.transcript.push_back({"environment", d.observation, std::nullopt, false, false, {}});
    rec.termination = Termination::single_shot;

    std::vector<GradedCall> task_calls;
    if (is_task_call(call)) {
        task_calls.push_back(d.graded);
        apply(rec, grade(task_calls, ins, embedder, options.grading));
    } else {
        // A non-task call is still the graded call; it scores 0.
        rec.graded_call = call;
    }
    return rec;
}

EpisodeRecord run_multi_turn(agent::Policy& policy, Simulator& simulator, const corpus::Instruction& ins,
                             webenv::EnvState& env, std::string_view memory_text,
                             const retrieval::Embedder& embedder, const EpisodeOptions& options) {
    if (options.max_steps < 1) throw InvalidArgument("max_steps must be >= 1");
    auto rec = start_record(ins, agent::Track::multi);
    rec.termination = Termination::max_steps;
    const auto schemas = webenv::tool_schemas(true);
    std::vector<agent::TranscriptTurn> turns;
    std::vector<GradedCall> task_calls;

    while (rec.steps < options.max_steps) {
        const auto messages =
            agent::assemble_prompt(agent::Track::multi, ins, memory_text, schemas, turns, options.variant);
        std::string text;
        try {
            text = policy.complete(messages, 1, options.sampling).front();
        } catch (const Error& e) {
            rec.failed = true;
            rec.error = e.what();
            break;
        }
        auto action = agent::parse_tool_call(text, options.variant);
        const bool parse_failed = std::holds_alternative<agent::ParseFailure>(action);
        const auto call = parse_failed ? webenv::FunctionCall::respond(text)
                                       : std::get<webenv::FunctionCall>(action);

        auto d = dispatch(env, call);
        ++rec.steps;
        rec.transcript.push_back({"agent", text, call, parse_failed, d.graded.accepted, d.error});
        turns.push_back({agent::Role::assistant, text});
        if (is_task_call(call)) task_calls.push_back(d.graded);

        if (!d.graded.accepted) {
            rec.transcript.push_back({"environment", d.observation, std::nullopt, false, false, {}});
            turns.push_back({agent::Role::tool, d.observation});
            continue;
        }
        const auto kind = *webenv::parse_function_kind(call.name);
        if (kind == webenv::FunctionKind::stop) {
            rec.termination = Termination::stop;
            break;
        }
        if (kind == webenv::FunctionKind::respond) {
            std::string reply;
            try {
                reply = simulator.reply(ins, turns, call.arguments.at("message").get<std::string>());
            } catch (const Error& e) {
                rec.failed = true;
                rec.error = std::string("simulator: ") + e.what();
                break;
            }
            rec.transcript.push_back({"simulator", reply, std::nullopt, false, false, {}});
            turns.push_back({agent::Role::user, reply});
            continue;
        }
        rec.transcript.push_back({"environment", d.observation, std::nullopt, false, false, {}});
        turns.push_back({agent::Role::tool, d.observation});
    }
    apply(rec, grade(task_calls, ins, embedder, options.grading));
    return rec;
}

std::vector<EpisodeRecord> run_parallel(std::size_t n, std::size_t jobs,
                                        const std::function<EpisodeRecord(std::size_t)>& fn) {
    std::vector<EpisodeRecord> out(n);
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

// --- memory -----------------------------------------------------------------------

MemoryProvider::MemoryProvider(const corpus::DatasetBundle& bundle,
                               std::shared_ptr<const retrieval::Embedder> embedder, memory::Strategy strategy,
                               memory::RetrievalConfig config, std::uint64_t seed)
    : embedder_(std::move(embedder)), strategy_(strategy), config_(config), seed_(seed) {
    if (!embedder_) throw InvalidArgument("MemoryProvider: null embedder");
    config_.validate();
    if (strategy_ == memory::Strategy::none) return;
    for (const auto& user : bundle.users) {
        banks_.emplace(user.user_id, memory::build_memory_bank(user, bundle.catalog, *embedder_));
    }
}

std::string MemoryProvider::memory_for(const corpus::Instruction& ins) const {
    if (strategy_ == memory::Strategy::none) return {};
    const auto it = banks_.find(ins.user_id);
    if (it == banks_.end()) throw ValidationError("no memory bank for user " + ins.user_id);
    const auto& bank = it->second;
    if (strategy_ == memory::Strategy::puma) {
        return memory::retrieve_task_memory(bank, ins.text, ins.task_kind, config_, *embedder_).serialize();
    }
    retrieval::EmbeddingVector query;
    if (strategy_ == memory::Strategy::relevant) query = embedder_->embed(ins.text);
    // Per-instruction seed so selections do not depend on scheduling order.
    const auto seed = seed_ ^ retrieval::fnv1a64(ins.instruction_id);
    const auto picked = memory::select_baseline_memory(bank, strategy_, config_.k, seed, query);
    std::string out;
    std::size_t used = 0;
    for (auto idx : picked) {
        const auto line = memory::serialize_entry(bank.entries[idx]);
        const auto tokens = memory::count_tokens(line);
        if (used + tokens > config_.token_budget) break;
        used += tokens;
        if (!out.empty()) out += '\n';
        out += line;
    }
    return out;
}

}  // namespace pwab::eval
