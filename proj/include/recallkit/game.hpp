#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recallkit/error.hpp"

namespace recallkit::game {

inline constexpr std::size_t kMinPoolSize = 6;  // five placements plus one distractor

struct GameConfig {
  int level = 1;
  std::size_t trials_per_level = 10;
  std::vector<std::size_t> schedule{3, 3, 3, 3, 4, 4, 4, 5, 5, 5};
  int display_ms = 8000;
  int latency_ms = 0;  // 5000 on levels 2 and 3
  std::size_t grid_positions = 9;
  std::size_t practice_trials = 2;
  bool feedback = true;

  /// Defaults for a level; throws GameError(invalid_level) outside 1..3.
  static GameConfig for_level(int level);
  void validate() const;
};

nlohmann::json to_json(const GameConfig& config);

enum class ErrorCode {
  invalid_level,
  pool_too_small,
  invalid_position,
  out_of_order,
  double_submit,
  session_completed,
  latency_not_applicable,
};

std::string_view to_string(ErrorCode code);

/// Rejected engine operation. The session is left exactly as it was.
class GameError : public Error {
 public:
  GameError(ErrorCode code, const std::string& what) : Error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class SessionState { created, practicing, in_trial, completed };
enum class Phase { showing, latency, answering, answered };

std::string_view to_string(SessionState state);
std::string_view to_string(Phase phase);

struct Placement {
  std::size_t position = 0;  // 0..8, row-major on a 3x3 grid
  std::string image_id;

  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Everything random about one trial, fixed when the session is created.
struct TrialPlan {
  bool practice = false;
  std::vector<Placement> placements;  // sorted by position
  std::size_t target = 0;             // index into placements
  std::optional<std::string> distractor;

  friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

/// The practice trials first, then the scored ones. Pure function of its inputs.
std::vector<TrialPlan> plan_session(const GameConfig& config, const std::vector<std::string>& pool,
                                    std::uint64_t seed);

struct Event {
  std::size_t seq = 0;
  std::string op;
  nlohmann::json input;
  nlohmann::json output;
  std::int64_t t_ms = 0;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

/// Milliseconds since the epoch; injectable so transcripts can be replayed exactly.
using Clock = std::function<std::int64_t()>;
Clock system_clock();

/// One Position Recall playthrough. Not thread-safe; callers serialize access.
class GameSession {
 public:
  static GameSession create(std::string session_id, std::string user_id, int level,
                            std::vector<std::string> pool, std::uint64_t seed, Clock clock = system_clock());

  /// Rebuilds a session from its transcript, checking every recorded output.
  /// Throws DataError if the log is malformed or diverges.
  static GameSession replay(const std::vector<Event>& events, Clock clock = system_clock());

  nlohmann::json start_trial(bool practice = false);
  nlohmann::json advance_latency();
  nlohmann::json reveal_target();
  nlohmann::json submit_answer(std::int64_t position);

  /// Current public state; what GET on a session returns.
  nlohmann::json snapshot() const;

  const std::string& id() const { return session_id_; }
  const std::string& user_id() const { return user_id_; }
  const GameConfig& config() const { return config_; }
  const std::vector<std::string>& pool() const { return pool_; }
  std::uint64_t seed() const { return seed_; }
  SessionState state() const { return state_; }
  int score() const { return 100 * int(correct_count_); }
  std::size_t correct_count() const { return correct_count_; }
  std::size_t scored_completed() const { return scored_completed_; }
  const std::vector<TrialPlan>& plan() const { return plan_; }
  const std::vector<Event>& transcript() const { return events_; }

 private:
  GameSession() = default;

  struct Current {
    std::size_t plan_index = 0;
    Phase phase = Phase::showing;
    std::optional<std::size_t> answer;
    bool correct = false;
  };

  const TrialPlan& current_plan() const { return plan_[current_->plan_index]; }
  std::size_t trial_number() const;  // 1-based within practice or scored trials
  [[noreturn]] void fail(ErrorCode code, const std::string& what) const;
  void check_not_completed() const;
  nlohmann::json record(std::string op, nlohmann::json input, nlohmann::json output);

  std::string session_id_;
  std::string user_id_;
  GameConfig config_;
  std::vector<std::string> pool_;
  std::uint64_t seed_ = 0;
  std::vector<TrialPlan> plan_;
  Clock clock_;

  SessionState state_ = SessionState::created;
  std::optional<Current> current_;
  std::size_t practice_started_ = 0;
  std::size_t scored_started_ = 0;
  std::size_t scored_completed_ = 0;
  std::size_t correct_count_ = 0;
  std::vector<Event> events_;
};

}  // namespace recallkit::game
