#include "rca/gateway.hpp"
#include "rca/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
// Must match the core library build of httplib.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include <thread>

namespace rca {
namespace {

using test::error_kind;
using test::TempDir;

struct FlakyProvider : Provider {
    int failures_left = 0;
    bool transient = true;
    int calls = 0;
    std::string complete(const ModelRequest& request, const RoleConfig&) override {
        ++calls;
        if (failures_left > 0) {
            --failures_left;
            throw ProviderError("flaky", transient);
        }
        return "ok:" + request.purpose;
    }
};

GatewayOptions options(GatewayMode mode, std::vector<std::chrono::milliseconds>* sleeps = nullptr) {
    GatewayOptions o;
    o.mode = mode;
    o.sleep = [sleeps](std::chrono::milliseconds d) {
        if (sleeps) sleeps->push_back(d);
    };
    return o;
}

std::map<RoleTag, std::shared_ptr<Provider>> all_roles(std::shared_ptr<Provider> p) {
    std::map<RoleTag, std::shared_ptr<Provider>> m;
    for (auto r : kAllRoles) m[r] = p;
    return m;
}

std::vector<CassetteEntry> sample_cassette() {
    std::vector<CassetteEntry> entries;
    const std::pair<RoleTag, std::string> calls[] = {
        {RoleTag::base_planner, "planner"}, {RoleTag::worker, "edit_script"}, {RoleTag::base_planner, "planner"}};
    for (std::size_t i = 0; i < 3; ++i) {
        CassetteEntry e;
        e.sequence = i;
        e.role = calls[i].first;
        e.purpose = calls[i].second;
        e.prompt = "prompt " + std::to_string(i);
        e.prompt_digest = prompt_digest(e.prompt);
        e.response = "response " + std::to_string(i);
        e.temperature = default_role_config(e.role).temperature;
        entries.push_back(e);
    }
    return entries;
}

TEST(Roles, DefaultsPerTag) {
    EXPECT_DOUBLE_EQ(default_role_config(RoleTag::base_planner).temperature, 0.8);
    EXPECT_DOUBLE_EQ(default_role_config(RoleTag::expert_planner).temperature, 0.8);
    EXPECT_DOUBLE_EQ(default_role_config(RoleTag::worker).temperature, 0.2);
    EXPECT_EQ(default_role_config(RoleTag::base_planner).retry_budget, 8);
    EXPECT_EQ(default_role_config(RoleTag::intermediate_planner).retry_budget, 4);
    EXPECT_EQ(default_role_config(RoleTag::expert_planner).retry_budget, 1);
    EXPECT_EQ(default_role_config(RoleTag::worker).retry_budget, 8);
    for (auto r : kAllRoles) EXPECT_EQ(parse_role(to_string(r)), r);
    EXPECT_EQ(error_kind([] { parse_role("planner"); }), ErrorKind::config);
}

TEST(Cassette, LineRoundTrip) {
    auto e = sample_cassette()[1];
    e.prompt = "multi\nline \"quoted\" \t prompt";
    e.response = "```python\nprint('x')\n```\n";
    const auto line = to_cassette_line(e);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(parse_cassette_line(line, 1), e);
}

TEST(Cassette, SaveLoad) {
    TempDir tmp;
    const auto entries = sample_cassette();
    save_cassette(tmp / "c.jsonl", entries);
    EXPECT_EQ(load_cassette(tmp / "c.jsonl"), entries);
}

TEST(Cassette, EmptyFileLoadsEmpty) {
    TempDir tmp;
    test::write(tmp / "c.jsonl", "");
    EXPECT_TRUE(load_cassette(tmp / "c.jsonl").empty());
}

TEST(Cassette, TruncatedLineIsParseError) {
    TempDir tmp;
    auto content = to_cassette_line(sample_cassette()[0]) + "\n" + to_cassette_line(sample_cassette()[1]);
    content.resize(content.size() - 10);
    test::write(tmp / "c.jsonl", content);
    try {
        load_cassette(tmp / "c.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Cassette, SequenceMustIncrease) {
    TempDir tmp;
    auto entries = sample_cassette();
    entries[2].sequence = 1;
    save_cassette(tmp / "c.jsonl", entries);
    EXPECT_EQ(error_kind([&] { load_cassette(tmp / "c.jsonl"); }), ErrorKind::parse);
}

TEST(Replay, ServesInOrderWithoutProviders) {
    auto sentinel = std::make_shared<SentinelProvider>();
    Gateway gw(options(GatewayMode::replay), all_roles(sentinel), sample_cassette());
    EXPECT_FALSE(gw.allows_concurrency());
    EXPECT_EQ(gw.complete(RoleTag::base_planner, "planner", "prompt 0"), "response 0");
    EXPECT_EQ(gw.complete(RoleTag::worker, "edit_script", "prompt 1"), "response 1");
    EXPECT_EQ(gw.replay_remaining(), 1u);
    EXPECT_EQ(gw.complete(RoleTag::base_planner, "planner", "prompt 2"), "response 2");
    EXPECT_EQ(sentinel->calls(), 0u);
    EXPECT_EQ(gw.calls(RoleTag::base_planner), 2u);
    EXPECT_EQ(gw.total_calls(), 3u);
    EXPECT_EQ(error_kind([&] { gw.complete(RoleTag::worker, "x", "y"); }), ErrorKind::cassette_exhausted);
}

TEST(Replay, DigestMismatchNamesTheEntry) {
    Gateway gw(options(GatewayMode::replay), {}, sample_cassette());
    gw.complete(RoleTag::base_planner, "planner", "prompt 0");
    try {
        gw.complete(RoleTag::worker, "edit_script", "prompt one");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::digest_mismatch);
        const std::string what = e.what();
        EXPECT_NE(what.find("entry 1"), std::string::npos) << what;
        EXPECT_NE(what.find("byte 7"), std::string::npos) << what;
    }
}

TEST(Replay, RoleMismatch) {
    Gateway gw(options(GatewayMode::replay), {}, sample_cassette());
    EXPECT_EQ(error_kind([&] { gw.complete(RoleTag::worker, "planner", "prompt 0"); }), ErrorKind::role_mismatch);
}

TEST(Record, WritesEveryCallInOrder) {
    TempDir tmp;
    auto provider = std::make_shared<FlakyProvider>();
    auto opts = options(GatewayMode::record);
    opts.cassette_path = tmp / "c.jsonl";
    opts.transcript_path = tmp / "t.jsonl";
    {
        Gateway gw(opts, all_roles(provider));
        gw.complete(RoleTag::base_planner, "planner", "p0");
        gw.complete(RoleTag::worker, "reflection", "p1");
        gw.complete(RoleTag::expert_planner, "expert_help", "p2");
    }
    const auto cassette = load_cassette(tmp / "c.jsonl");
    ASSERT_EQ(cassette.size(), 3u);
    EXPECT_EQ(cassette[1].role, RoleTag::worker);
    EXPECT_EQ(cassette[1].purpose, "reflection");
    EXPECT_EQ(cassette[1].response, "ok:reflection");
    EXPECT_DOUBLE_EQ(cassette[1].temperature, 0.2);
    EXPECT_DOUBLE_EQ(cassette[2].temperature, 0.8);
    EXPECT_EQ(cassette[2].prompt_digest, text::sha256_hex("p2"));
    EXPECT_EQ(load_cassette(tmp / "t.jsonl"), cassette);

    Gateway replayed(options(GatewayMode::replay), {}, cassette);
    EXPECT_EQ(replayed.complete(RoleTag::base_planner, "planner", "p0"), "ok:planner");
}

TEST(Record, NeedsCassettePath) {
    EXPECT_EQ(error_kind([] { Gateway gw(options(GatewayMode::record), {}); }), ErrorKind::usage);
}

TEST(Transport, TransientErrorsRetriedWithBackoff) {
    std::vector<std::chrono::milliseconds> sleeps;
    auto provider = std::make_shared<FlakyProvider>();
    provider->failures_left = 2;
    Gateway gw(options(GatewayMode::live, &sleeps), all_roles(provider));
    EXPECT_EQ(gw.complete(RoleTag::worker, "x", "p"), "ok:x");
    EXPECT_EQ(provider->calls, 3);
    EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(1000),
                                                             std::chrono::milliseconds(2000)}));
}

TEST(Transport, RetriesExhausted) {
    std::vector<std::chrono::milliseconds> sleeps;
    auto provider = std::make_shared<FlakyProvider>();
    provider->failures_left = 3;
    Gateway gw(options(GatewayMode::live, &sleeps), all_roles(provider));
    EXPECT_EQ(error_kind([&] { gw.complete(RoleTag::worker, "x", "p"); }), ErrorKind::budget_exhausted);
    EXPECT_EQ(provider->calls, 3);
    EXPECT_EQ(gw.total_calls(), 0u);
}

TEST(Transport, PermanentErrorsAreNotRetried) {
    auto provider = std::make_shared<FlakyProvider>();
    provider->failures_left = 1;
    provider->transient = false;
    Gateway gw(options(GatewayMode::live), all_roles(provider));
    EXPECT_EQ(error_kind([&] { gw.complete(RoleTag::worker, "x", "p"); }), ErrorKind::provider);
    EXPECT_EQ(provider->calls, 1);
}

TEST(Transport, BackoffIsCapped) {
    EXPECT_EQ(Gateway::backoff_delay(0).count(), 1000);
    EXPECT_EQ(Gateway::backoff_delay(3).count(), 8000);
    EXPECT_EQ(Gateway::backoff_delay(40).count(), 30000);
}

TEST(Scripted, KeyPrecedenceAndDefaults) {
    ScriptedProvider p({{"worker/edit_script", {"specific"}}, {"edit_script", {"purpose"}}, {"worker", {"role"}}},
                       {{"worker", "fallback"}});
    RoleConfig cfg;
    const ModelRequest edit{RoleTag::worker, "edit_script", "", 0.2};
    EXPECT_EQ(p.complete(edit, cfg), "specific");
    EXPECT_EQ(p.complete(edit, cfg), "purpose");
    EXPECT_EQ(p.complete(edit, cfg), "role");
    EXPECT_EQ(p.complete(edit, cfg), "fallback");
    const ModelRequest planner{RoleTag::base_planner, "planner", "", 0.8};
    EXPECT_EQ(error_kind([&] { p.complete(planner, cfg); }), ErrorKind::provider);
}

TEST(Scripted, SharedBindingSharesQueues) {
    TempDir tmp;
    test::write(tmp / "s.json", R"({"queues": {"planner": ["a", "b"]}})");
    std::map<RoleTag, RoleConfig> roles;
    for (auto r : kAllRoles) {
        roles[r].provider = "scripted";
        roles[r].script = (tmp / "s.json").string();
    }
    auto providers = make_providers(roles);
    EXPECT_EQ(providers[RoleTag::base_planner], providers[RoleTag::intermediate_planner]);
    Gateway gw(options(GatewayMode::live), providers);
    EXPECT_EQ(gw.complete(RoleTag::base_planner, "planner", "p"), "a");
    EXPECT_EQ(gw.complete(RoleTag::intermediate_planner, "planner", "p"), "b");
}

TEST(Providers, UnknownProviderIsConfigError) {
    std::map<RoleTag, RoleConfig> roles{{RoleTag::worker, RoleConfig{}}};
    roles[RoleTag::worker].provider = "telepathy";
    EXPECT_EQ(error_kind([&] { make_providers(roles); }), ErrorKind::config);
}

TEST(Providers, SentinelAlwaysFails) {
    auto sentinel = std::make_shared<SentinelProvider>();
    Gateway gw(options(GatewayMode::live), all_roles(sentinel));
    EXPECT_EQ(error_kind([&] { gw.complete(RoleTag::worker, "x", "p"); }), ErrorKind::provider);
    EXPECT_EQ(sentinel->calls(), 1u);
}

class LocalServer {
public:
    explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }
    std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

TEST(Http, ChatCompletionsRoundTrip) {
    nlohmann::json seen;
    std::string auth;
    LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen = nlohmann::json::parse(req.body);
        auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices": [{"message": {"role": "assistant", "content": "hello"}}]})",
                        "application/json");
    });
    ::setenv("RCA_TEST_HTTP_KEY", "k123", 1);
    RoleConfig cfg = default_role_config(RoleTag::worker);
    cfg.provider = "openai";
    cfg.model = "m1";
    cfg.endpoint = server.endpoint();
    cfg.credential_env = "RCA_TEST_HTTP_KEY";
    auto provider = make_http_provider();
    EXPECT_EQ(provider->complete({RoleTag::worker, "x", "the prompt", 0.2}, cfg), "hello");
    EXPECT_EQ(seen["model"], "m1");
    EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.2);
    EXPECT_EQ(seen["messages"][0]["content"], "the prompt");
    EXPECT_EQ(auth, "Bearer k123");
}

TEST(Http, ServerErrorsAreTransient) {
    int hits = 0;
    LocalServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        if (hits < 3) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"choices": [{"message": {"content": "late"}}]})", "application/json");
    });
    std::map<RoleTag, RoleConfig> roles;
    for (auto r : kAllRoles) {
        roles[r] = default_role_config(r);
        roles[r].provider = "openai";
        roles[r].endpoint = server.endpoint();
    }
    auto opts = options(GatewayMode::live);
    opts.roles = roles;
    Gateway gw(opts, make_providers(roles));
    EXPECT_EQ(gw.complete(RoleTag::worker, "x", "p"), "late");
    EXPECT_EQ(hits, 3);
}

TEST(Http, ClientErrorsArePermanent) {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    RoleConfig cfg;
    cfg.endpoint = server.endpoint();
    try {
        make_http_provider()->complete({RoleTag::worker, "x", "p", 0.2}, cfg);
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_FALSE(e.transient());
    }
}

}  // namespace
}  // namespace rca
