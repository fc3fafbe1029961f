#pragma once

// HTTP routes over MonitorService. Bodies are JSON; uploads carry a sequence
// document and take the calendar date from the `date` query parameter.
//
//   POST /patients                                   {"patient_id", "name"}
//   POST /patients/{id}/actions                      assignment fields + "sample" + "profile"
//   POST /patients/{id}/actions/{aid}/uploads?date=  sequence document -> detection result
//   GET  /patients/{id}/actions/{aid}/results
//   GET  /patients/{id}/actions/{aid}/completion?date=
//   POST /notifications/check?date=
//   GET  /patients/{id}/notifications

#include <string>

// Eigen must precede httplib.h, whose resolver headers define a `_res` macro.
#include "rehab/error.hpp"
#include "rehab/io.hpp"
#include "rehab/service/monitor.hpp"

#include "httplib.h"
#include "json.hpp"

namespace rehab::service {

inline int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return 400;
        case ErrorKind::validation:
        case ErrorKind::indeterminate: return 422;
        case ErrorKind::not_found: return 404;
        case ErrorKind::conflict: return 409;
        case ErrorKind::io: return 500;
    }
    return 500;
}

namespace detail {

inline nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed request body: ") + e.what());
    }
}

inline Date date_param(const httplib::Request& req) {
    if (!req.has_param("date")) throw Error(ErrorKind::parse, "missing date query parameter");
    return parse_date(req.get_param_value("date"));
}

inline void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump() + "\n", "application/json");
}

template <class F>
auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            reply(res, http_status(e.kind()), {{"error", e.what()}});
        } catch (const std::exception& e) {
            reply(res, 500, {{"error", e.what()}});
        }
    };
}

template <class T>
nlohmann::json array_of(const std::vector<T>& xs) {
    auto out = nlohmann::json::array();
    for (const auto& x : xs) out.push_back(to_json(x));
    return out;
}

}  // namespace detail

inline void mount_routes(httplib::Server& server, MonitorService& service) {
    using detail::guarded;
    using detail::reply;
    using Req = httplib::Request;
    using Res = httplib::Response;

    server.Post("/patients", guarded([&service](const Req& req, Res& res) {
        reply(res, 201, to_json(service.add_patient(patient_from_json(detail::parse_body(req)))));
    }));

    server.Post(R"(/patients/([^/]+)/actions)", guarded([&service](const Req& req, Res& res) {
        const auto body = detail::parse_body(req);
        auto a = assignment_from_json(body);
        a.patient_id = req.matches[1];
        const auto sample = sequence_from_json(detail::field(body, "sample"));
        reply(res, 201, to_json(service.assign_action(std::move(a), sample)));
    }));

    server.Post(R"(/patients/([^/]+)/actions/([^/]+)/uploads)", guarded([&service](const Req& req, Res& res) {
        const auto date = detail::date_param(req);
        const auto seq = parse_sequence(req.body);
        const auto u = service.ingest_upload(req.matches[1], req.matches[2], seq, date);
        auto body = to_json(u.result);
        body["upload_id"] = u.upload_id;
        reply(res, 201, body);
    }));

    server.Get(R"(/patients/([^/]+)/actions/([^/]+)/results)", guarded([&service](const Req& req, Res& res) {
        reply(res, 200, detail::array_of(service.results(req.matches[1], req.matches[2])));
    }));

    server.Get(R"(/patients/([^/]+)/actions/([^/]+)/completion)", guarded([&service](const Req& req, Res& res) {
        const std::string patient = req.matches[1], action = req.matches[2];
        const auto date = detail::date_param(req);
        const auto ledger = service.week_ledger(patient, action, date);
        int earned = 0;
        for (const auto& e : ledger) earned += e.checkpoint_earned;
        int required = 0;
        for (const auto& a : service.assignments(patient))
            if (a.action_id == action) required = a.required();
        reply(res, 200,
              {{"patient_id", patient},
               {"action_id", action},
               {"date", format_date(date)},
               {"checkpoints", earned},
               {"required_checkpoints", required},
               {"completion_rate", service.completion_rate(patient, action, date)},
               {"ledger", detail::array_of(ledger)}});
    }));

    server.Post("/notifications/check", guarded([&service](const Req& req, Res& res) {
        reply(res, 200, detail::array_of(service.notification_check(detail::date_param(req))));
    }));

    server.Get(R"(/patients/([^/]+)/notifications)", guarded([&service](const Req& req, Res& res) {
        reply(res, 200, detail::array_of(service.notifications(req.matches[1])));
    }));
}

}  // namespace rehab::service
