#include "recallkit/game.hpp"

#include <algorithm>
#include <chrono>
#include <memory>
#include <numeric>
#include <set>

#include "recallkit/random.hpp"

namespace recallkit::game {

GameConfig GameConfig::for_level(int level) {
  if (level < 1 || level > 3) {
    throw GameError(ErrorCode::invalid_level, "level must be 1, 2 or 3 (got " + std::to_string(level) + ")");
  }
  GameConfig c;
  c.level = level;
  c.latency_ms = level == 1 ? 0 : 5000;
  return c;
}

void GameConfig::validate() const {
  if (level < 1 || level > 3) throw GameError(ErrorCode::invalid_level, "level must be 1, 2 or 3");
  if (trials_per_level == 0 || schedule.size() != trials_per_level) {
    throw ArgumentError("schedule must hold one image count per trial");
  }
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1 || schedule[i] > grid_positions) throw ArgumentError("schedule count outside the grid");
    if (i > 0 && schedule[i] < schedule[i - 1]) throw ArgumentError("schedule must be non-decreasing");
  }
  if (display_ms < 0 || latency_ms < 0) throw ArgumentError("durations must be non-negative");
}

nlohmann::json to_json(const GameConfig& c) {
  return {{"level", c.level},
          {"trials_per_level", c.trials_per_level},
          {"schedule", c.schedule},
          {"display_ms", c.display_ms},
          {"latency_ms", c.latency_ms},
          {"grid_positions", c.grid_positions},
          {"practice_trials", c.practice_trials},
          {"feedback", c.feedback}};
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_level: return "invalid_level";
    case ErrorCode::pool_too_small: return "pool_too_small";
    case ErrorCode::invalid_position: return "invalid_position";
    case ErrorCode::out_of_order: return "out_of_order";
    case ErrorCode::double_submit: return "double_submit";
    case ErrorCode::session_completed: return "session_completed";
    case ErrorCode::latency_not_applicable: return "latency_not_applicable";
  }
  return "out_of_order";
}

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::created: return "created";
    case SessionState::practicing: return "practicing";
    case SessionState::in_trial: return "in_trial";
    case SessionState::completed: return "completed";
  }
  return "created";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::showing: return "showing";
    case Phase::latency: return "latency";
    case Phase::answering: return "answering";
    case Phase::answered: return "answered";
  }
  return "showing";
}

std::vector<TrialPlan> plan_session(const GameConfig& config, const std::vector<std::string>& pool,
                                    std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x6a6d));
  std::vector<std::size_t> deck;
  std::size_t next = 0;
  // Walks one shuffled pass over the pool at a time so images repeat only after the
  // whole pool has been shown; items already on screen are skipped, not lost.
  auto draw = [&](const std::set<std::size_t>& on_screen) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = next; k < deck.size(); ++k) {
        if (!on_screen.count(deck[k])) {
          std::swap(deck[next], deck[k]);
          return deck[next++];
        }
      }
      deck.resize(pool.size());
      std::iota(deck.begin(), deck.end(), std::size_t{0});
      rng.shuffle(deck);
      next = 0;
    }
    throw Error("image pool exhausted within one trial");
  };

  std::vector<TrialPlan> plans;
  const std::size_t total = config.practice_trials + config.trials_per_level;
  for (std::size_t t = 0; t < total; ++t) {
    TrialPlan plan;
    plan.practice = t < config.practice_trials;
    const std::size_t k = plan.practice ? config.schedule.front() : config.schedule[t - config.practice_trials];
    const auto positions = rng.sample_without_replacement(config.grid_positions, k);
    std::set<std::size_t> shown;
    for (std::size_t pos : positions) {
      const std::size_t img = draw(shown);
      shown.insert(img);
      plan.placements.push_back({pos, pool[img]});
    }
    std::sort(plan.placements.begin(), plan.placements.end(),
              [](const Placement& a, const Placement& b) { return a.position < b.position; });
    plan.target = rng.index(k);
    if (config.level == 3) plan.distractor = pool[draw(shown)];
    plans.push_back(std::move(plan));
  }
  return plans;
}

nlohmann::json to_json(const Event& e) {
  return {{"seq", e.seq}, {"op", e.op}, {"input", e.input}, {"output", e.output}, {"t_ms", e.t_ms}};
}

Event event_from_json(const nlohmann::json& j) {
  try {
    return {j.at("seq").get<std::size_t>(), j.at("op").get<std::string>(), j.at("input"), j.at("output"),
            j.at("t_ms").get<std::int64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed session event: ") + e.what());
  }
}

Clock system_clock() {
  return [] {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
  };
}

GameSession GameSession::create(std::string session_id, std::string user_id, int level,
                                std::vector<std::string> pool, std::uint64_t seed, Clock clock) {
  GameConfig config = GameConfig::for_level(level);
  const std::set<std::string> distinct(pool.begin(), pool.end());
  if (distinct.size() != pool.size()) throw ArgumentError("image pool contains duplicate ids");
  if (pool.size() < kMinPoolSize) {
    throw GameError(ErrorCode::pool_too_small, "image pool has " + std::to_string(pool.size()) +
                                                   " images; at least " + std::to_string(kMinPoolSize) +
                                                   " are required");
  }
  GameSession s;
  s.session_id_ = std::move(session_id);
  s.user_id_ = std::move(user_id);
  s.config_ = std::move(config);
  s.pool_ = std::move(pool);
  s.seed_ = seed;
  s.plan_ = plan_session(s.config_, s.pool_, seed);
  s.clock_ = std::move(clock);
  s.record("create",
           {{"session_id", s.session_id_}, {"user_id", s.user_id_}, {"level", level}, {"seed", seed},
            {"pool", s.pool_}},
           {{"session_id", s.session_id_}, {"config", to_json(s.config_)}});
  return s;
}

GameSession GameSession::replay(const std::vector<Event>& events, Clock clock) {
  if (events.empty() || events.front().op != "create") throw DataError("transcript must start with a create event");
  auto now = std::make_shared<std::int64_t>(events.front().t_ms);
  Clock replay_clock = [now] { return *now; };
  try {
    const auto& in = events.front().input;
    GameSession s = create(in.at("session_id").get<std::string>(), in.at("user_id").get<std::string>(),
                           in.at("level").get<int>(), in.at("pool").get<std::vector<std::string>>(),
                           in.at("seed").get<std::uint64_t>(), replay_clock);
    for (std::size_t i = 1; i < events.size(); ++i) {
      const Event& e = events[i];
      if (e.seq != i) throw DataError("transcript sequence gap at event " + std::to_string(i));
      *now = e.t_ms;
      nlohmann::json out;
      if (e.op == "trial") {
        out = s.start_trial(e.input.at("practice").get<bool>());
      } else if (e.op == "latency") {
        out = s.advance_latency();
      } else if (e.op == "target") {
        out = s.reveal_target();
      } else if (e.op == "answer") {
        out = s.submit_answer(e.input.at("position").get<std::int64_t>());
      } else {
        throw DataError("unknown transcript op '" + e.op + "'");
      }
      if (out != e.output) throw DataError("transcript diverges at event " + std::to_string(i));
    }
    s.clock_ = std::move(clock);
    return s;
  } catch (const GameError& e) {
    throw DataError(std::string("transcript replays an invalid operation: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed transcript: ") + e.what());
  }
}

std::size_t GameSession::trial_number() const {
  const std::size_t idx = current_->plan_index;
  return idx < config_.practice_trials ? idx + 1 : idx - config_.practice_trials + 1;
}

void GameSession::fail(ErrorCode code, const std::string& what) const { throw GameError(code, what); }

void GameSession::check_not_completed() const {
  if (state_ == SessionState::completed) {
    fail(ErrorCode::session_completed, "session is completed with final score " + std::to_string(score()));
  }
}

nlohmann::json GameSession::record(std::string op, nlohmann::json input, nlohmann::json output) {
  events_.push_back({events_.size(), std::move(op), std::move(input), output, clock_()});
  return output;
}

nlohmann::json GameSession::start_trial(bool practice) {
  check_not_completed();
  if (current_ && current_->phase != Phase::answered) {
    fail(ErrorCode::out_of_order, "the current trial has not been answered yet");
  }
  std::size_t plan_index = 0;
  if (practice) {
    if (scored_started_ > 0) fail(ErrorCode::out_of_order, "practice is over once scored trials begin");
    if (practice_started_ >= config_.practice_trials) fail(ErrorCode::out_of_order, "no practice trials remain");
    plan_index = practice_started_;
  } else {
    plan_index = config_.practice_trials + scored_started_;
  }

  // All checks passed; mutate.
  if (practice) {
    ++practice_started_;
    state_ = SessionState::practicing;
  } else {
    ++scored_started_;
    state_ = SessionState::in_trial;
  }
  current_ = Current{plan_index, Phase::showing, std::nullopt, false};

  const TrialPlan& p = current_plan();
  auto placements = nlohmann::json::array();
  for (const auto& pl : p.placements) placements.push_back({{"position", pl.position}, {"image_id", pl.image_id}});
  const char* latency = config_.level == 1 ? "none" : config_.level == 2 ? "black" : "distractor";
  return record("trial", {{"practice", practice}},
                {{"trial", trial_number()},
                 {"practice", practice},
                 {"placements", std::move(placements)},
                 {"display_ms", config_.display_ms},
                 {"latency_ms", config_.latency_ms},
                 {"latency", latency},
                 {"phase", to_string(Phase::showing)}});
}

nlohmann::json GameSession::advance_latency() {
  check_not_completed();
  if (config_.level == 1) fail(ErrorCode::latency_not_applicable, "level 1 has no latency phase");
  if (!current_ || current_->phase != Phase::showing) {
    fail(ErrorCode::out_of_order, "latency follows the showing phase of a trial");
  }
  current_->phase = Phase::latency;
  nlohmann::json out{{"latency_ms", config_.latency_ms}, {"phase", to_string(Phase::latency)}};
  if (config_.level == 2) {
    out["kind"] = "black";
  } else {
    out["kind"] = "distractor";
    out["image_id"] = *current_plan().distractor;
  }
  return record("latency", nlohmann::json::object(), std::move(out));
}

nlohmann::json GameSession::reveal_target() {
  check_not_completed();
  const Phase required = config_.level == 1 ? Phase::showing : Phase::latency;
  if (!current_ || current_->phase != required) {
    fail(ErrorCode::out_of_order, config_.level == 1 ? "the target follows the showing phase"
                                                      : "the target follows the latency phase");
  }
  current_->phase = Phase::answering;
  const TrialPlan& p = current_plan();
  std::vector<std::size_t> options;
  for (const auto& pl : p.placements) options.push_back(pl.position);
  return record("target", nlohmann::json::object(),
                {{"target_image_id", p.placements[p.target].image_id},
                 {"options", options},
                 {"phase", to_string(Phase::answering)}});
}

nlohmann::json GameSession::submit_answer(std::int64_t position) {
  if (current_ && current_->phase == Phase::answered) fail(ErrorCode::double_submit, "this trial was already answered");
  check_not_completed();
  if (!current_ || current_->phase != Phase::answering) {
    fail(ErrorCode::out_of_order, "answers are accepted only after the target is revealed");
  }
  if (position < 0 || position >= std::int64_t(config_.grid_positions)) {
    fail(ErrorCode::invalid_position,
         "position must lie in [0, " + std::to_string(config_.grid_positions) + ")");
  }

  const TrialPlan& p = current_plan();
  const std::size_t target_pos = p.placements[p.target].position;
  const bool correct = std::size_t(position) == target_pos;
  current_->phase = Phase::answered;
  current_->answer = std::size_t(position);
  current_->correct = correct;
  if (!p.practice) {
    ++scored_completed_;
    if (correct) ++correct_count_;
    if (scored_completed_ == config_.trials_per_level) state_ = SessionState::completed;
  }

  nlohmann::json out{{"trial", trial_number()},
                     {"practice", p.practice},
                     {"position", position},
                     {"score", score()},
                     {"correct_count", correct_count_},
                     {"completed", state_ == SessionState::completed},
                     {"phase", to_string(Phase::answered)}};
  if (config_.feedback) {
    out["correct"] = correct;
    out["target_position"] = target_pos;
  }
  if (state_ == SessionState::completed) out["final_score"] = score();
  return record("answer", {{"position", position}}, std::move(out));
}

nlohmann::json GameSession::snapshot() const {
  nlohmann::json j{{"session_id", session_id_},
                   {"user_id", user_id_},
                   {"level", config_.level},
                   {"seed", seed_},
                   {"config", to_json(config_)},
                   {"state", to_string(state_)},
                   {"score", score()},
                   {"correct_count", correct_count_},
                   {"trials_completed", scored_completed_},
                   {"practice_started", practice_started_},
                   {"pool_size", pool_.size()},
                   {"events", events_.size()}};
  if (state_ == SessionState::completed) j["final_score"] = score();
  if (current_) {
    const TrialPlan& p = current_plan();
    nlohmann::json t{{"trial", trial_number()}, {"practice", p.practice}, {"phase", to_string(current_->phase)}};
    auto placements = nlohmann::json::array();
    for (const auto& pl : p.placements) placements.push_back({{"position", pl.position}, {"image_id", pl.image_id}});
    t["placements"] = std::move(placements);
    if (current_->phase != Phase::showing && p.distractor) t["distractor_image_id"] = *p.distractor;
    if (current_->phase == Phase::answering || current_->phase == Phase::answered) {
      t["target_image_id"] = p.placements[p.target].image_id;
    }
    if (current_->answer) {
      t["answer"] = *current_->answer;
      if (config_.feedback) t["correct"] = current_->correct;
    }
    j["current_trial"] = std::move(t);
  }
  return j;
}

}  // namespace recallkit::game
