#include "semtrace/http.hpp"

#include <unistd.h>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "semtrace/error.hpp"

namespace semtrace {
namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    if (comma > start) out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::optional<ExpansionPolicy> policy_param(const httplib::Request& req) {
  if (!req.has_param("policy")) return std::nullopt;
  auto p = parse_policy(req.get_param_value("policy"));
  if (!p) throw ValidationError("unknown expansion policy: " + req.get_param_value("policy"));
  return p;
}

Json body_json(const httplib::Request& req) {
  if (req.body.empty()) throw ValidationError("request body is empty");
  return Json::parse(req.body);
}

void reply(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

using Handler = std::function<Json(const httplib::Request&)>;

httplib::Server::Handler wrap(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      reply(res, h(req));
    } catch (const std::exception& e) {
      reply(res, error_json(e), http_status(e));
    }
  };
}

Document document_from_request(const Json& j) {
  Document d;
  d.id = j.at("id").get<std::string>();
  auto kind = parse_document_kind(j.at("kind").get<std::string>());
  if (!kind) throw ValidationError("unknown document kind: " + j.at("kind").get<std::string>());
  d.kind = *kind;
  d.title = j.value("title", "");
  d.body = j.at("body").get<std::string>();
  if (j.contains("fields")) d.fields = j.at("fields").get<std::map<std::string, std::string>>();
  if (j.contains("links")) d.links = j.at("links").get<std::set<std::string>>();
  return d;
}

void routes(httplib::Server& srv, Service& svc) {
  srv.Get("/health", wrap([&](const auto&) { return svc.health(); }));
  srv.Get("/ontology/tree", wrap([&](const auto&) { return svc.tree(); }));
  srv.Get("/ontology/expand", wrap([&](const httplib::Request& req) {
    auto policy = policy_param(req);
    if (req.has_param("term")) return svc.expand(req.get_param_value("term"), policy);
    TriplePattern p;
    auto term = [&](const char* k) {
      return req.has_param(k) ? parse_pattern_term(req.get_param_value(k)) : PatternTerm{};
    };
    p = {term("subject"), term("predicate"), term("object")};
    if (p.all_wildcard()) throw ValidationError("give term, or subject/predicate/object");
    return svc.expand_query(p, policy);
  }));
  srv.Post("/annotate", wrap([&](const httplib::Request& req) {
    if (req.get_header_value("Content-Type").starts_with("application/json")) {
      return svc.annotate(body_json(req).at("text").get<std::string>());
    }
    return svc.annotate(req.body);
  }));
  srv.Post("/documents", wrap([&](const httplib::Request& req) -> Json {
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw ValidationError("multipart upload needs a file part");
      auto file = req.get_file_value("file");
      auto field = [&](const char* k) {
        return req.has_file(k) ? req.get_file_value(k).content : std::string();
      };
      Document d;
      d.id = field("id").empty() ? std::filesystem::path(file.filename).stem().string() : field("id");
      auto kind_text = field("kind");
      std::optional<DocumentKind> kind = parse_document_kind(kind_text);
      if (!kind) throw ValidationError("unknown document kind: " + kind_text);
      d.kind = *kind;
      d.title = field("title");
      d.body = file.content;
      for (const auto& l : split_list(field("links"))) d.links.insert(l);
      return svc.ingest(std::move(d), field("replace") == "true").to_json();
    }
    auto j = body_json(req);
    if (j.is_array()) {
      Json out = Json::array();
      for (const auto& item : j) {
        out.push_back(svc.ingest(document_from_request(item), item.value("replace", false)).to_json());
      }
      return out;
    }
    return svc.ingest(document_from_request(j), j.value("replace", false)).to_json();
  }));
  srv.Post("/scripts/run", wrap([&](const httplib::Request& req) {
    auto j = body_json(req);
    RunRequest r;
    r.script = j.at("script").get<std::string>();
    r.fail = j.value("fail", std::vector<std::string>{});
    if (j.contains("start")) r.start = j.at("start").get<Tick>();
    if (j.contains("stride")) r.stride = j.at("stride").get<Tick>();
    r.log_id = j.value("log_id", "");
    r.ingest = j.value("ingest", false);
    return svc.run(r);
  }));
  srv.Get("/search", wrap([&](const httplib::Request& req) {
    SearchRequest s;
    s.q = req.has_param("q") ? req.get_param_value("q") : std::string(kMatchAll);
    if (req.has_param("fl")) s.fl = split_list(req.get_param_value("fl"));
    for (std::size_t i = 0; i < req.get_param_value_count("facet.field"); ++i) {
      s.facet_fields.push_back(req.get_param_value("facet.field", i));
    }
    for (std::size_t i = 0; i < req.get_param_value_count("fq"); ++i) {
      auto fq = req.get_param_value("fq", i);
      auto colon = fq.find(':');
      if (colon == std::string::npos) throw ValidationError("fq must be field:value: " + fq);
      s.filters.emplace_back(fq.substr(0, colon), fq.substr(colon + 1));
    }
    return svc.search(s);
  }));
  srv.Post("/semantic-search", wrap([&](const httplib::Request& req) {
    auto j = body_json(req);
    std::optional<ExpansionPolicy> policy;
    if (j.is_object() && j.contains("policy")) {
      policy = parse_policy(j.at("policy").get<std::string>());
      if (!policy) throw ValidationError("unknown expansion policy: " + j.at("policy").dump());
    }
    std::set<DocumentKind> kinds;
    if (j.is_object() && j.contains("kinds")) {
      for (const auto& k : j.at("kinds")) {
        auto kind = parse_document_kind(k.get<std::string>());
        if (!kind) throw ValidationError("unknown document kind: " + k.dump());
        kinds.insert(*kind);
      }
    }
    auto pattern = pattern_from_json(j.is_object() && j.contains("pattern") ? j.at("pattern") : j);
    return svc.semantic_search(pattern, policy, kinds);
  }));
  srv.Get(R"(/logs/([^/]+)/similar)", wrap([&](const httplib::Request& req) {
    SimilarityOptions opts;
    if (req.has_param("k")) opts.k = std::stoul(req.get_param_value("k"));
    if (req.has_param("min_score")) opts.min_score = std::stod(req.get_param_value("min_score"));
    if (req.has_param("raw")) opts.normalize = req.get_param_value("raw") != "true";
    return svc.similar(req.matches[1], opts);
  }));
  srv.Get("/traceability", wrap([&](const httplib::Request& req) {
    auto mode = req.has_param("mode") ? req.get_param_value("mode") : std::string("semantic");
    auto source = parse_link_source(mode);
    if (!source) throw ValidationError("unknown traceability mode: " + mode);
    std::size_t min_shared = 1;
    if (req.has_param("min_shared")) min_shared = std::stoul(req.get_param_value("min_shared"));
    auto list = [&](const char* k) {
      return req.has_param(k) ? split_list(req.get_param_value(k)) : std::vector<std::string>{};
    };
    return svc.traceability(*source, list("requirements"), list("tests"), min_shared);
  }));
  srv.Post("/traceability/review", wrap([&](const httplib::Request& req) {
    auto j = body_json(req);
    std::optional<std::string> why;
    if (j.contains("justification")) why = j.at("justification").get<std::string>();
    return svc.review(j.at("requirement").get<std::string>(), j.at("test").get<std::string>(),
                      j.value("mark", true), why);
  }));
}

}  // namespace

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  routes(impl_->server, service);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::run() {
  impl_->server.listen_after_bind();
  impl_->service.flush();
}

void HttpServer::stop() { impl_->server.stop(); }

bool HttpServer::running() const { return impl_->server.is_running(); }

void serve(Service& service) {
  HttpServer server(service);
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  int port = server.bind(service.config().host, service.config().port);
  std::cerr << "listening on " << service.config().host << ":" << port << "\n";
  std::atomic<bool> done{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    if (!done) server.stop();
  });
  server.run();
  done = true;
  // Wakes the waiter when run() ended without a signal.
  kill(getpid(), SIGTERM);
  waiter.join();
}

}  // namespace semtrace
