#pragma once

// Monitor service: patients, action assignments, uploads run through the
// pipeline, daily checkpoints, weekly completion rate and reminders.
//
// Every mutation appends one record to the store while holding the writer
// lock, so readers see either none or all of it. The pipeline itself runs
// outside the lock. Ledgers and rates are recomputed from the upload records.
//
// Weeks are anchored at the assignment's start date: days 0-6 form the first
// week, 7-13 the second, and so on.

#include <algorithm>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/io.hpp"
#include "rehab/pipeline.hpp"
#include "rehab/service/calendar.hpp"
#include "rehab/service/records.hpp"
#include "rehab/service/store.hpp"

namespace rehab::service {

class MonitorService {
public:
    explicit MonitorService(RecordStore store = {}, PipelineParams params = {})
        : store_(std::move(store)), params_(std::move(params)) {
        for (const auto& r : store_.records()) load(r);
    }

    MonitorService(const MonitorService&) = delete;
    MonitorService& operator=(const MonitorService&) = delete;

    const PipelineParams& params() const noexcept { return params_; }

    Patient add_patient(Patient p) {
        if (p.patient_id.empty()) throw Error(ErrorKind::validation, "patient_id must not be empty");
        std::unique_lock lock(mutex_);
        if (patients_.contains(p.patient_id)) throw Error(ErrorKind::conflict, "patient exists: " + p.patient_id);
        auto record = to_json(p);
        record["type"] = "patient";
        store_.append(record);
        patients_.emplace(p.patient_id, p);
        return p;
    }

    ActionAssignment assign_action(ActionAssignment a, const PoseSequence& sample) {
        if (a.visit_date < a.start_date) throw Error(ErrorKind::validation, "visit_date precedes start_date");
        auto prepared = std::make_shared<const PoseSequence>(preprocess(sample, params_.preprocess).sequence);
        const auto document = serialize_sequence(sample);

        std::unique_lock lock(mutex_);
        if (!patients_.contains(a.patient_id)) throw Error(ErrorKind::not_found, "unknown patient " + a.patient_id);
        const auto key = std::pair{a.patient_id, a.action_id};
        if (actions_.contains(key))
            throw Error(ErrorKind::conflict, "action " + a.action_id + " already assigned to " + a.patient_id);
        a.sample_ref = store_.put_sequence(next_id('s', ++samples_), document);
        auto record = to_json(a);
        record["type"] = "assignment";
        store_.append(record);
        actions_.emplace(key, ActionState{a, std::move(prepared), {}});
        return a;
    }

    UploadRecord ingest_upload(const std::string& patient_id, const std::string& action_id,
                               const PoseSequence& upload, Date date) {
        std::shared_ptr<const PoseSequence> sample;
        CalibrationProfile profile;
        {
            std::shared_lock lock(mutex_);
            const auto& s = action(patient_id, action_id);
            sample = s.sample;
            profile = s.assignment.profile;
        }
        const auto result = analyze(upload, *sample, profile, params_);
        const auto document = serialize_sequence(upload);

        std::unique_lock lock(mutex_);
        auto& s = action(patient_id, action_id);
        UploadRecord u{next_id('u', uploads_ + 1), patient_id, action_id, date, {}, result};
        u.sequence_ref = store_.put_sequence(u.upload_id, document);
        auto record = to_json(u);
        record["type"] = "upload";
        store_.append(record);
        ++uploads_;
        s.uploads.push_back(u);
        return u;
    }

    std::vector<Patient> patients() const {
        std::shared_lock lock(mutex_);
        std::vector<Patient> out;
        for (const auto& [id, p] : patients_) out.push_back(p);
        return out;
    }

    std::vector<ActionAssignment> assignments(const std::string& patient_id) const {
        std::shared_lock lock(mutex_);
        require_patient(patient_id);
        std::vector<ActionAssignment> out;
        for (const auto& [key, s] : actions_)
            if (key.first == patient_id) out.push_back(s.assignment);
        return out;
    }

    std::vector<UploadRecord> results(const std::string& patient_id, const std::string& action_id) const {
        std::shared_lock lock(mutex_);
        return action(patient_id, action_id).uploads;
    }

    LedgerEntry daily_rollup(const std::string& patient_id, const std::string& action_id, Date date) const {
        std::shared_lock lock(mutex_);
        return rollup(action(patient_id, action_id), date);
    }

    // The days of the week containing `through`, up to and including it.
    std::vector<LedgerEntry> week_ledger(const std::string& patient_id, const std::string& action_id,
                                         Date through) const {
        std::shared_lock lock(mutex_);
        const auto& s = action(patient_id, action_id);
        std::vector<LedgerEntry> out;
        if (through < s.assignment.start_date) return out;
        for (Date d = week_start(s.assignment, through); d <= through; d = add_days(d, 1))
            out.push_back(rollup(s, d));
        return out;
    }

    double completion_rate(const std::string& patient_id, const std::string& action_id, Date through) const {
        std::shared_lock lock(mutex_);
        return rate(action(patient_id, action_id), through);
    }

    // Runs the daily reminder rule for one patient. Returns the reminders due on
    // `date`; each (patient, action, date) is recorded at most once.
    std::vector<Notification> notification_check(const std::string& patient_id, Date date) {
        std::unique_lock lock(mutex_);
        require_patient(patient_id);
        return check(patient_id, date);
    }

    std::vector<Notification> notification_check(Date date) {
        std::unique_lock lock(mutex_);
        std::vector<Notification> out;
        for (const auto& [id, p] : patients_) {
            auto due = check(id, date);
            out.insert(out.end(), due.begin(), due.end());
        }
        return out;
    }

    std::vector<Notification> notifications(const std::string& patient_id) const {
        std::shared_lock lock(mutex_);
        require_patient(patient_id);
        std::vector<Notification> out;
        for (const auto& n : notifications_)
            if (n.patient_id == patient_id) out.push_back(n);
        return out;
    }

    // Copies of the committed records, for replay.
    std::vector<nlohmann::json> records() const {
        std::shared_lock lock(mutex_);
        return store_.records();
    }

    std::string stored_sequence(const std::string& ref) const {
        std::shared_lock lock(mutex_);
        return store_.get_sequence(ref);
    }

private:
    struct ActionState {
        ActionAssignment assignment;
        std::shared_ptr<const PoseSequence> sample;  // preprocessed
        std::vector<UploadRecord> uploads;
    };

    static std::string next_id(char prefix, std::size_t n) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
        return buf;
    }

    void require_patient(const std::string& id) const {
        if (!patients_.contains(id)) throw Error(ErrorKind::not_found, "unknown patient " + id);
    }

    const ActionState& action(const std::string& patient_id, const std::string& action_id) const {
        require_patient(patient_id);
        const auto it = actions_.find({patient_id, action_id});
        if (it == actions_.end())
            throw Error(ErrorKind::not_found, "action " + action_id + " is not assigned to " + patient_id);
        return it->second;
    }

    ActionState& action(const std::string& patient_id, const std::string& action_id) {
        return const_cast<ActionState&>(std::as_const(*this).action(patient_id, action_id));
    }

    static LedgerEntry rollup(const ActionState& s, Date date) {
        LedgerEntry e{date, 0, false};
        for (const auto& u : s.uploads)
            if (u.date == date && u.result.repetitions >= s.assignment.reps_per_set) ++e.sets_completed;
        e.checkpoint_earned = e.sets_completed >= s.assignment.sets_per_checkpoint;
        return e;
    }

    static Date week_start(const ActionAssignment& a, Date d) {
        return add_days(a.start_date, days_between(a.start_date, d) / 7 * 7);
    }

    static double rate(const ActionState& s, Date through) {
        if (through < s.assignment.start_date) return 0.0;
        std::set<Date> earned;
        for (const auto& u : s.uploads)
            if (u.date >= week_start(s.assignment, through) && u.date <= through && rollup(s, u.date).checkpoint_earned)
                earned.insert(u.date);
        const double r = 100.0 * static_cast<double>(earned.size()) / s.assignment.required();
        return std::min(r, 100.0);
    }

    std::vector<Notification> check(const std::string& patient_id, Date date) {
        std::vector<Notification> out;
        for (const auto& [key, s] : actions_) {
            if (key.first != patient_id) continue;
            const auto& a = s.assignment;
            if (date == a.visit_date || date <= a.start_date) continue;
            const double r = rate(s, add_days(date, -1));
            if (r >= 100.0) continue;
            Notification n{patient_id, a.action_id, date, r};
            if (notified_.insert({patient_id, a.action_id, date}).second) {
                auto record = to_json(n);
                record["type"] = "notification";
                store_.append(record);
                notifications_.push_back(n);
            }
            out.push_back(n);
        }
        return out;
    }

    void load(const nlohmann::json& r) {
        const auto type = detail::string_field(r, "type");
        if (type == "patient") {
            auto p = patient_from_json(r);
            patients_.emplace(p.patient_id, p);
        } else if (type == "assignment") {
            auto a = assignment_from_json(r);
            const auto sample = parse_sequence(store_.get_sequence(a.sample_ref));
            auto prepared = std::make_shared<const PoseSequence>(preprocess(sample, params_.preprocess).sequence);
            ++samples_;
            actions_.emplace(std::pair{a.patient_id, a.action_id}, ActionState{a, std::move(prepared), {}});
        } else if (type == "upload") {
            auto u = upload_from_json(r);
            ++uploads_;
            action(u.patient_id, u.action_id).uploads.push_back(u);
        } else if (type == "notification") {
            auto n = notification_from_json(r);
            notified_.insert({n.patient_id, n.action_id, n.date});
            notifications_.push_back(n);
        } else {
            throw Error(ErrorKind::parse, "unknown record type " + type);
        }
    }

    mutable std::shared_mutex mutex_;
    RecordStore store_;
    PipelineParams params_;
    std::map<std::string, Patient> patients_;
    std::map<std::pair<std::string, std::string>, ActionState> actions_;
    std::vector<Notification> notifications_;
    std::set<std::tuple<std::string, std::string, Date>> notified_;
    std::size_t samples_ = 0;
    std::size_t uploads_ = 0;
};

// Re-executes every operation in `source`'s log against `target`, re-running the
// pipeline on each stored upload. Throws if a recomputed detection result
// differs from the recorded one.
inline void replay(const MonitorService& source, MonitorService& target) {
    for (const auto& r : source.records()) {
        const auto type = detail::string_field(r, "type");
        if (type == "patient") {
            target.add_patient(patient_from_json(r));
        } else if (type == "assignment") {
            auto a = assignment_from_json(r);
            const auto sample = parse_sequence(source.stored_sequence(a.sample_ref));
            target.assign_action(std::move(a), sample);
        } else if (type == "upload") {
            const auto u = upload_from_json(r);
            const auto seq = parse_sequence(source.stored_sequence(u.sequence_ref));
            const auto again = target.ingest_upload(u.patient_id, u.action_id, seq, u.date);
            if (!(again.result == u.result))
                throw Error(ErrorKind::conflict, "replay diverged at upload " + u.upload_id);
        } else if (type == "notification") {
            const auto n = notification_from_json(r);
            target.notification_check(n.patient_id, n.date);
        }
    }
}

}  // namespace rehab::service
