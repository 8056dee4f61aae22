#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "edusim/longdiv.hpp"
#include "edusim/marks_csv.hpp"
#include "edusim/stats.hpp"
#include "json.hpp"

namespace edusim::session {

using TimePoint = std::chrono::sys_time<std::chrono::milliseconds>;
using Clock = std::function<std::chrono::system_clock::time_point()>;

std::string to_iso8601(TimePoint t);
TimePoint from_iso8601(const std::string& text);

struct ProblemSpec {
  int count = 1;
  int dividend_digits = 4;
  int divisor_digits = 2;

  void validate() const;  // throws SessionError("invalid_spec")
};

inline constexpr int kMaxProblemsPerSession = 100;

struct Cursor {
  std::size_t problem_index = 0;
  std::size_t step_index = 0;

  bool operator==(const Cursor&) const = default;
};

struct Attempt {
  Cursor cursor;
  std::uint64_t value = 0;
  bool is_correct = false;
  TimePoint at;
};

struct SessionScore {
  double mark = 0.0;
  std::size_t steps_total = 0;
  std::size_t steps_correct_first_try = 0;
  double duration_seconds = 0.0;
};

enum class SessionState { Active, Finalized };

struct TutorSession {
  std::string session_id;
  std::string cohort_label;
  std::string student_id;
  bool audio_enabled = false;
  ProblemSpec spec;
  std::uint64_t seed = 0;
  std::vector<longdiv::DivisionTrace> traces;
  Cursor cursor;
  std::vector<Attempt> attempts;
  TimePoint started_at;
  std::optional<TimePoint> finalized_at;
  std::optional<SessionScore> score;

  SessionState state() const { return finalized_at ? SessionState::Finalized : SessionState::Active; }
  bool all_steps_done() const { return cursor.problem_index >= traces.size(); }
  std::size_t total_steps() const;
};

struct CreateRequest {
  std::string cohort_label;
  std::optional<std::string> student_id;
  bool audio_enabled = false;
  ProblemSpec spec;
  std::optional<std::uint64_t> seed;
};

struct SubmitResult {
  longdiv::StepVerdict verdict;
  bool advanced = false;
  bool session_complete = false;
  Cursor cursor;  // after the submission
};

// A mark ready for statistics: either a finalized session or an imported row.
struct FinalizedMark {
  std::string cohort;
  std::string student_id;
  double mark = 0.0;
  TimePoint finalized_at;
  std::string record_id;  // session id, or import-NNNNNN
};

struct CohortSummary {
  std::string label;
  stats::CohortStats stats;
  std::optional<std::string> baseline_label;
  std::optional<double> improvement_percent;
};

// Tutoring sessions with an append-only JSONL event log. Every mutation is
// written to <data_dir>/events.jsonl before it becomes visible; the constructor
// rebuilds state by replaying that file. An empty data_dir keeps everything in
// memory.
//
// Operations on one session are serialized; different sessions proceed in
// parallel. Export and statistics read a consistent snapshot of finalized marks.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path data_dir = {}, Clock clock = {});
  ~SessionStore();

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  TutorSession create_session(const CreateRequest& request);

  /// `expected_cursor`, when given, must equal the current cursor; a mismatch
  /// (e.g. a resent request after the cursor already advanced) is rejected as
  /// stale_cursor without logging an attempt.
  SubmitResult submit_step(const std::string& session_id, std::uint64_t value,
                           std::optional<Cursor> expected_cursor = std::nullopt);

  SessionScore finalize_session(const std::string& session_id);

  TutorSession get(const std::string& session_id) const;

  /// Finalized marks ordered by finalization time, then record id.
  std::vector<FinalizedMark> finalized_marks(const std::optional<std::string>& cohort = {}) const;

  std::string export_marks_csv(const std::optional<std::string>& cohort = {}) const;

  CohortSummary cohort_stats(const std::string& label,
                             const std::optional<std::string>& baseline_label) const;

  /// Adds external marks (e.g. a field-study CSV) as finalized records.
  std::size_t import_marks(const std::vector<csv::MarkRow>& rows);

  std::filesystem::path log_path() const;

 private:
  struct Entry {
    mutable std::mutex mutex;
    TutorSession session;
  };

  std::shared_ptr<Entry> find(const std::string& session_id) const;
  TimePoint now();
  TimePoint stamp_after(const TutorSession& s);
  void append_event(const nlohmann::json& event);
  void replay();
  void apply_created(const nlohmann::json& e);
  void apply_submitted(const nlohmann::json& e);
  void apply_finalized(const nlohmann::json& e);
  void apply_imported(const nlohmann::json& e);
  std::string new_session_id();

  std::filesystem::path data_dir_;
  Clock clock_;

  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::vector<FinalizedMark> finalized_;
  std::size_t import_counter_ = 0;

  std::mutex log_mutex_;
  std::ofstream log_;
};

/// Score from the attempt log: a step counts when the first attempt logged at
/// its cursor was correct. Unattempted steps count as incorrect.
SessionScore score_session(const TutorSession& session, TimePoint finalized_at);

// Client-facing JSON. Never includes expected values of steps the student has
// not yet attempted.
nlohmann::json client_view(const TutorSession& session);
nlohmann::json step_prompt(const TutorSession& session);
nlohmann::json to_json(const SessionScore& score);
nlohmann::json to_json(const CohortSummary& summary);

std::string prompt_text(const longdiv::DivisionStep& step, std::uint64_t divisor);

}  // namespace edusim::session
