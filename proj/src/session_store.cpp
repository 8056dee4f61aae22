#include "edusim/session_store.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include "edusim/errors.hpp"
#include "edusim/format.hpp"

namespace edusim::session {

using nlohmann::json;
namespace chr = std::chrono;

std::string to_iso8601(TimePoint t) {
  const auto day = chr::floor<chr::days>(t);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()),
                static_cast<int>(hms.subseconds().count()));
  return buf;
}

TimePoint from_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, ms = 0, consumed = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ%n", &y, &mo, &d, &h, &mi, &s, &ms,
                  &consumed) != 7 ||
      static_cast<std::size_t>(consumed) != text.size()) {
    throw ParseError(0, "bad timestamp '" + text + "'");
  }
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError(0, "bad date in '" + text + "'");
  return TimePoint{chr::sys_days{ymd}} + chr::hours{h} + chr::minutes{mi} + chr::seconds{s} +
         chr::milliseconds{ms};
}

void ProblemSpec::validate() const {
  if (count < 1 || count > kMaxProblemsPerSession) {
    throw SessionError("invalid_spec", 400,
                       "count must be between 1 and " + std::to_string(kMaxProblemsPerSession));
  }
  if (divisor_digits < 1 || dividend_digits < divisor_digits ||
      dividend_digits > longdiv::kMaxDigits) {
    throw SessionError("invalid_spec", 400,
                       "digit counts must satisfy 1 <= divisor_digits <= dividend_digits <= " +
                           std::to_string(longdiv::kMaxDigits));
  }
}

std::size_t TutorSession::total_steps() const {
  std::size_t n = 0;
  for (const auto& t : traces) n += t.steps.size();
  return n;
}

SessionScore score_session(const TutorSession& session, TimePoint finalized_at) {
  std::map<std::pair<std::size_t, std::size_t>, bool> first_attempt;
  for (const auto& a : session.attempts) {
    first_attempt.try_emplace({a.cursor.problem_index, a.cursor.step_index}, a.is_correct);
  }
  SessionScore score;
  score.steps_total = session.total_steps();
  score.steps_correct_first_try = static_cast<std::size_t>(
      std::count_if(first_attempt.begin(), first_attempt.end(), [](const auto& kv) { return kv.second; }));
  score.mark = longdiv::score_attempts(score.steps_total, score.steps_correct_first_try);
  score.duration_seconds =
      chr::duration<double>(finalized_at - session.started_at).count();
  return score;
}

namespace {

void advance(TutorSession& s) {
  ++s.cursor.step_index;
  if (s.cursor.step_index >= s.traces[s.cursor.problem_index].steps.size()) {
    ++s.cursor.problem_index;
    s.cursor.step_index = 0;
  }
}

std::vector<longdiv::DivisionTrace> traces_for(const std::vector<longdiv::DivisionProblem>& problems) {
  std::vector<longdiv::DivisionTrace> out;
  out.reserve(problems.size());
  for (const auto& p : problems) out.push_back(longdiv::solve_trace(p));
  return out;
}

bool mark_order(const FinalizedMark& a, const FinalizedMark& b) {
  return std::tie(a.finalized_at, a.record_id) < std::tie(b.finalized_at, b.record_id);
}

}  // namespace

SessionStore::SessionStore(std::filesystem::path data_dir, Clock clock)
    : data_dir_(std::move(data_dir)), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return chr::system_clock::now(); };
  if (data_dir_.empty()) return;
  std::filesystem::create_directories(data_dir_);
  replay();
  log_.open(log_path(), std::ios::app | std::ios::binary);
  if (!log_) throw std::runtime_error("cannot open event log " + log_path().string());
}

SessionStore::~SessionStore() = default;

std::filesystem::path SessionStore::log_path() const { return data_dir_ / "events.jsonl"; }

TimePoint SessionStore::now() { return chr::floor<chr::milliseconds>(clock_()); }

TimePoint SessionStore::stamp_after(const TutorSession& s) {
  TimePoint t = now();
  TimePoint floor = s.started_at;
  if (!s.attempts.empty()) floor = s.attempts.back().at;
  return std::max(t, floor + chr::milliseconds{1});
}

void SessionStore::append_event(const json& event) {
  if (data_dir_.empty()) return;
  std::lock_guard lock(log_mutex_);
  log_ << event.dump() << '\n';
  log_.flush();
  if (!log_) throw std::runtime_error("failed to write event log");
}

std::string SessionStore::new_session_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  char buf[24];
  std::snprintf(buf, sizeof buf, "s-%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& session_id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    throw SessionError("unknown_session", 404, "no session with id '" + session_id + "'");
  }
  return it->second;
}

TutorSession SessionStore::create_session(const CreateRequest& request) {
  if (request.cohort_label.empty() || request.cohort_label.find_first_of(",\n\r") != std::string::npos) {
    throw SessionError("invalid_spec", 400, "cohort_label must be non-empty and free of commas");
  }
  if (request.student_id && (request.student_id->empty() ||
                             request.student_id->find_first_of(",\n\r") != std::string::npos)) {
    throw SessionError("invalid_spec", 400, "student_id must be non-empty and free of commas");
  }
  request.spec.validate();

  auto entry = std::make_shared<Entry>();
  TutorSession& s = entry->session;
  s.session_id = new_session_id();
  s.cohort_label = request.cohort_label;
  s.student_id = request.student_id.value_or(s.session_id);
  s.audio_enabled = request.audio_enabled;
  s.spec = request.spec;
  s.seed = request.seed ? *request.seed : std::random_device{}() * 0x100000000ULL + std::random_device{}();
  s.started_at = now();

  Rng rng(s.seed);
  std::vector<longdiv::DivisionProblem> problems;
  for (int i = 0; i < s.spec.count; ++i) {
    problems.push_back(longdiv::generate_problem(s.spec.dividend_digits, s.spec.divisor_digits, rng));
  }
  s.traces = traces_for(problems);

  append_event({{"type", "session_created"},
                {"session_id", s.session_id},
                {"cohort_label", s.cohort_label},
                {"student_id", s.student_id},
                {"audio_enabled", s.audio_enabled},
                {"spec", {{"count", s.spec.count},
                          {"dividend_digits", s.spec.dividend_digits},
                          {"divisor_digits", s.spec.divisor_digits}}},
                {"seed", s.seed},
                {"problems", problems},
                {"at", to_iso8601(s.started_at)}});

  std::unique_lock lock(map_mutex_);
  sessions_.emplace(s.session_id, entry);
  return s;
}

SubmitResult SessionStore::submit_step(const std::string& session_id, std::uint64_t value,
                                       std::optional<Cursor> expected_cursor) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  TutorSession& s = entry->session;
  if (s.state() == SessionState::Finalized) {
    throw SessionError("session_finalized", 409, "session '" + session_id + "' is finalized");
  }
  if (s.all_steps_done()) {
    throw SessionError("session_complete", 409,
                       "all steps of session '" + session_id + "' are done; finalize it");
  }
  if (expected_cursor && *expected_cursor != s.cursor) {
    throw SessionError("stale_cursor", 409,
                       "submission targets problem " + std::to_string(expected_cursor->problem_index) +
                           " step " + std::to_string(expected_cursor->step_index) +
                           " but the session is at problem " + std::to_string(s.cursor.problem_index) +
                           " step " + std::to_string(s.cursor.step_index));
  }

  const auto& trace = s.traces[s.cursor.problem_index];
  const auto verdict = longdiv::validate_step(trace, s.cursor.step_index, value);
  Attempt attempt{s.cursor, value, verdict.is_correct, stamp_after(s)};

  append_event({{"type", "step_submitted"},
                {"session_id", s.session_id},
                {"problem_index", attempt.cursor.problem_index},
                {"step_index", attempt.cursor.step_index},
                {"value", value},
                {"correct", verdict.is_correct},
                {"at", to_iso8601(attempt.at)}});

  s.attempts.push_back(attempt);
  if (verdict.is_correct) advance(s);
  return {verdict, verdict.is_correct, s.all_steps_done(), s.cursor};
}

SessionScore SessionStore::finalize_session(const std::string& session_id) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  TutorSession& s = entry->session;
  if (s.state() == SessionState::Finalized) {
    throw SessionError("session_finalized", 409, "session '" + session_id + "' is already finalized");
  }
  const TimePoint at = stamp_after(s);
  const SessionScore score = score_session(s, at);

  append_event({{"type", "session_finalized"},
                {"session_id", s.session_id},
                {"at", to_iso8601(at)},
                {"score", to_json(score)}});

  s.finalized_at = at;
  s.score = score;
  std::unique_lock map_lock(map_mutex_);
  finalized_.push_back({s.cohort_label, s.student_id, score.mark, at, s.session_id});
  return score;
}

TutorSession SessionStore::get(const std::string& session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session;
}

std::vector<FinalizedMark> SessionStore::finalized_marks(const std::optional<std::string>& cohort) const {
  std::vector<FinalizedMark> out;
  {
    std::shared_lock lock(map_mutex_);
    for (const auto& m : finalized_) {
      if (!cohort || m.cohort == *cohort) out.push_back(m);
    }
  }
  std::sort(out.begin(), out.end(), mark_order);
  return out;
}

std::string SessionStore::export_marks_csv(const std::optional<std::string>& cohort) const {
  std::vector<csv::MarkRow> rows;
  for (const auto& m : finalized_marks(cohort)) rows.push_back({m.cohort, m.student_id, m.mark});
  std::ostringstream os;
  csv::write_marks(os, rows);
  return os.str();
}

CohortSummary SessionStore::cohort_stats(const std::string& label,
                                         const std::optional<std::string>& baseline_label) const {
  std::vector<FinalizedMark> all = finalized_marks();
  auto sample_for = [&](const std::string& l) {
    stats::MarkSample sample{l, {}};
    for (const auto& m : all) {
      if (m.cohort == l) sample.marks.push_back(m.mark);
    }
    return sample;
  };

  const auto sample = sample_for(label);
  if (sample.marks.empty()) {
    throw SessionError("empty_cohort", 404, "cohort '" + label + "' has no finalized marks");
  }
  CohortSummary summary{label, stats::summarize(sample), std::nullopt, std::nullopt};
  if (baseline_label && !baseline_label->empty()) {
    summary.baseline_label = baseline_label;
    if (*baseline_label != label) {
      const auto base = sample_for(*baseline_label);
      if (!base.marks.empty()) {
        const auto base_stats = stats::summarize(base);
        if (base_stats.mean > 0.0) summary.improvement_percent = stats::improvement(summary.stats, base_stats);
      }
    }
  }
  return summary;
}

std::size_t SessionStore::import_marks(const std::vector<csv::MarkRow>& rows) {
  const TimePoint at = now();
  std::unique_lock lock(map_mutex_);
  json event_rows = json::array();
  std::vector<FinalizedMark> added;
  for (const auto& r : rows) {
    char id[32];
    std::snprintf(id, sizeof id, "import-%06zu", ++import_counter_);
    added.push_back({r.cohort, r.student_id, r.mark, at, id});
    event_rows.push_back({{"cohort", r.cohort}, {"student_id", r.student_id}, {"mark", r.mark}, {"id", id}});
  }
  append_event({{"type", "marks_imported"}, {"at", to_iso8601(at)}, {"rows", event_rows}});
  finalized_.insert(finalized_.end(), added.begin(), added.end());
  return added.size();
}

void SessionStore::replay() {
  std::ifstream in(log_path(), std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json e;
    try {
      e = json::parse(line);
    } catch (const json::parse_error&) {
      // A torn final line from a crash mid-write is dropped; anything else is corruption.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError(line_no, "corrupt event log entry");
    }
    const auto type = e.at("type").get<std::string>();
    if (type == "session_created") apply_created(e);
    else if (type == "step_submitted") apply_submitted(e);
    else if (type == "session_finalized") apply_finalized(e);
    else if (type == "marks_imported") apply_imported(e);
    else throw ParseError(line_no, "unknown event type '" + type + "'");
  }
}

void SessionStore::apply_created(const json& e) {
  auto entry = std::make_shared<Entry>();
  TutorSession& s = entry->session;
  s.session_id = e.at("session_id").get<std::string>();
  s.cohort_label = e.at("cohort_label").get<std::string>();
  s.student_id = e.at("student_id").get<std::string>();
  s.audio_enabled = e.at("audio_enabled").get<bool>();
  const auto& spec = e.at("spec");
  s.spec = {spec.at("count").get<int>(), spec.at("dividend_digits").get<int>(),
            spec.at("divisor_digits").get<int>()};
  s.seed = e.at("seed").get<std::uint64_t>();
  s.traces = traces_for(e.at("problems").get<std::vector<longdiv::DivisionProblem>>());
  s.started_at = from_iso8601(e.at("at").get<std::string>());
  sessions_.emplace(s.session_id, std::move(entry));
}

void SessionStore::apply_submitted(const json& e) {
  TutorSession& s = find(e.at("session_id").get<std::string>())->session;
  Attempt a{{e.at("problem_index").get<std::size_t>(), e.at("step_index").get<std::size_t>()},
            e.at("value").get<std::uint64_t>(),
            e.at("correct").get<bool>(),
            from_iso8601(e.at("at").get<std::string>())};
  s.attempts.push_back(a);
  if (a.is_correct) advance(s);
}

void SessionStore::apply_finalized(const json& e) {
  TutorSession& s = find(e.at("session_id").get<std::string>())->session;
  const TimePoint at = from_iso8601(e.at("at").get<std::string>());
  s.finalized_at = at;
  s.score = score_session(s, at);
  finalized_.push_back({s.cohort_label, s.student_id, s.score->mark, at, s.session_id});
}

void SessionStore::apply_imported(const json& e) {
  const TimePoint at = from_iso8601(e.at("at").get<std::string>());
  for (const auto& r : e.at("rows")) {
    ++import_counter_;
    finalized_.push_back({r.at("cohort").get<std::string>(), r.at("student_id").get<std::string>(),
                          r.at("mark").get<double>(), at, r.at("id").get<std::string>()});
  }
}

std::string prompt_text(const longdiv::DivisionStep& step, std::uint64_t divisor) {
  const auto w = std::to_string(step.working_value);
  const auto d = std::to_string(divisor);
  switch (step.kind) {
    case longdiv::StepKind::Divide:
      return "Divide " + w + " by " + d + ": how many times does " + d + " go into " + w + "?";
    case longdiv::StepKind::Multiply:
      return "Multiply " + w + " by " + d + ".";
    case longdiv::StepKind::Subtract:
      return "Subtract your product from " + w + ".";
    case longdiv::StepKind::BringDown:
      return "Bring down the next digit next to " + w + ". What is the new number?";
  }
  return {};
}

json step_prompt(const TutorSession& s) {
  if (s.all_steps_done()) return nullptr;
  const auto& trace = s.traces[s.cursor.problem_index];
  const auto& step = trace.steps[s.cursor.step_index];
  return {{"problem_index", s.cursor.problem_index},
          {"step_index", s.cursor.step_index},
          {"steps_in_problem", trace.steps.size()},
          {"problem", trace.problem},
          {"kind", longdiv::to_string(step.kind)},
          {"working_value", step.working_value},
          {"prompt", prompt_text(step, trace.problem.divisor)}};
}

json to_json(const SessionScore& score) {
  return {{"mark", score.mark},
          {"steps_total", score.steps_total},
          {"steps_correct_first_try", score.steps_correct_first_try},
          {"duration_seconds", score.duration_seconds}};
}

json client_view(const TutorSession& s) {
  json view = {{"session_id", s.session_id},
               {"cohort_label", s.cohort_label},
               {"student_id", s.student_id},
               {"audio_enabled", s.audio_enabled},
               {"state", s.state() == SessionState::Active ? "active" : "finalized"},
               {"started_at", to_iso8601(s.started_at)},
               {"problem_count", s.traces.size()},
               {"steps_total", s.total_steps()},
               {"cursor", {{"problem_index", s.cursor.problem_index},
                           {"step_index", s.cursor.step_index}}},
               {"current_step", step_prompt(s)}};

  // Steps of the current problem the student has already confirmed.
  json confirmed = json::array();
  if (!s.all_steps_done()) {
    const auto& trace = s.traces[s.cursor.problem_index];
    for (std::size_t i = 0; i < s.cursor.step_index; ++i) {
      confirmed.push_back({{"kind", longdiv::to_string(trace.steps[i].kind)},
                           {"value", trace.steps[i].expected_value}});
    }
  }
  view["confirmed_steps"] = confirmed;

  json attempts = json::array();
  for (const auto& a : s.attempts) {
    attempts.push_back({{"problem_index", a.cursor.problem_index},
                        {"step_index", a.cursor.step_index},
                        {"value", a.value},
                        {"is_correct", a.is_correct},
                        {"at", to_iso8601(a.at)}});
  }
  view["attempts"] = attempts;
  if (s.finalized_at) {
    view["finalized_at"] = to_iso8601(*s.finalized_at);
    view["score"] = to_json(*s.score);
  }
  return view;
}

json to_json(const CohortSummary& summary) {
  const auto& st = summary.stats;
  json j = {{"label", summary.label},
            {"n", st.n},
            {"mean", st.mean},
            {"variance", st.variance},
            {"stddev", st.stddev},
            {"coeff_variation", st.coeff_variation ? json(*st.coeff_variation) : json(nullptr)},
            {"baseline_label", summary.baseline_label ? json(*summary.baseline_label) : json(nullptr)},
            {"improvement_percent",
             summary.improvement_percent ? json(*summary.improvement_percent) : json(nullptr)}};
  j["display"] = {
      {"mean", stats::display_stat(st.mean)},
      {"variance", stats::display_stat(st.variance)},
      {"stddev", stats::display_stat(st.stddev)},
      {"coeff_variation", st.coeff_variation ? stats::display_stat(*st.coeff_variation) : ""},
      {"improvement_percent",
       summary.improvement_percent ? stats::display_percent(*summary.improvement_percent) : ""}};
  return j;
}

}  // namespace edusim::session
