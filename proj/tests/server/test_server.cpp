#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>

#include "gridt/protocol/verifier.hpp"
#include "gridt/rng.hpp"
#include "gridt/server/config.hpp"
#include "support/server_scenarios.hpp"

namespace gridt::testing {
namespace {

const json kManual = {{"type", "manual"}};

std::string error_code(const Reply& r) { return r.body.is_object() ? r.body["error"].value("code", "") : ""; }

TEST(ServerConfig, ParsesKeyValues) {
  std::istringstream in(
      "# comment\nlisten = 0.0.0.0:9000\ndata_dir = /var/gridt\ntick_seconds = 5\n"
      "forbid_mutual_pairs = false\noperator_token = abc\nlong_poll_seconds = 12.5\n");
  const auto c = server::parse_server_config(in);
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.data_dir, "/var/gridt");
  EXPECT_EQ(c.tick_seconds, 5.0);
  EXPECT_FALSE(c.forbid_mutual_pairs);
  EXPECT_EQ(c.operator_token, "abc");
  EXPECT_EQ(c.long_poll_seconds, 12.5);
  std::istringstream defaults("");
  EXPECT_EQ(server::parse_server_config(defaults).tick_seconds, 60.0);
}

TEST(ServerConfig, RejectsBadLines) {
  for (const char* text : {"nokey\n", "colour = blue\n", "port = 70000\n", "tick_seconds = -1\n",
                           "forbid_mutual_pairs = maybe\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(server::parse_server_config(in), std::invalid_argument) << text;
  }
}

TEST(ServerApi, CreateJoinViewSignal) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto id = api.create(2, kManual, {{"seed", 7}});

  const auto a = join(api, id, "ada");
  const auto b = join(api, id, "bob");
  const auto c = join(api, id, "cyd");

  auto va = api.get("/v1/networks/" + id + "/view", a.token);
  ASSERT_EQ(va.status, 200);
  EXPECT_EQ(va.body["user_id"], a.user_id);
  EXPECT_EQ(va.body["phase"], "active");
  EXPECT_EQ(va.body["inputs"].size(), 2u);
  EXPECT_FALSE(va.etag.empty());

  // Token scoping: each token shows its own member only.
  auto vb = api.get("/v1/networks/" + id + "/view", b.token);
  EXPECT_EQ(vb.body["user_id"], b.user_id);
  EXPECT_NE(vb.body.dump(), va.body.dump());

  auto s1 = api.post("/v1/networks/" + id + "/signal", json::object(), a.token);
  ASSERT_EQ(s1.status, 200);
  EXPECT_EQ(s1.body["signal"], 1);
  auto s2 = api.post("/v1/networks/" + id + "/signal", json::object(), a.token);
  EXPECT_EQ(s2.status, 200);
  EXPECT_EQ(s2.body, s1.body);

  auto msg = api.post("/v1/networks/" + id + "/signal", {{"message", "I'm in"}}, a.token);
  EXPECT_EQ(msg.body["message"], "I'm in");
  auto cleared = api.post("/v1/networks/" + id + "/message", {{"message", ""}}, a.token);
  EXPECT_EQ(cleared.body["message"], "");

  auto vc = api.get("/v1/networks/" + id + "/view", c.token);
  for (const auto& card : vc.body["inputs"]) {
    if (card["user_id"] == a.user_id) EXPECT_EQ(card["signal"], 1);
  }
}

TEST(ServerApi, ErrorCodes) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto id = api.create(2, kManual);
  const auto a = join(api, id, "ada");
  join(api, id, "bob");
  join(api, id, "cyd");
  const auto other = api.create(2, kManual);

  const auto drop = api.get("/v1/networks/" + id + "/view", a.token).body["inputs"][0]["user_id"];
  auto locked = api.post("/v1/networks/" + id + "/rewire", {{"drop_user_id", drop}, {"add", "random"}}, a.token);
  EXPECT_EQ(locked.status, 423);
  EXPECT_EQ(error_code(locked), "REWIRE_LOCKED");

  EXPECT_EQ(error_code(api.get("/v1/networks/" + id + "/view")), "FORBIDDEN");
  EXPECT_EQ(error_code(api.get("/v1/networks/" + id + "/view", "bogus")), "FORBIDDEN");
  EXPECT_EQ(error_code(api.get("/v1/networks/" + other + "/view", a.token)), "FORBIDDEN");
  EXPECT_EQ(error_code(api.get("/v1/networks/nowhere/public")), "NOT_FOUND");
  EXPECT_EQ(error_code(api.get("/v1/nothing-here")), "NOT_FOUND");

  auto malformed = api.post_raw("/v1/networks/" + id + "/join", "{not json", "");
  EXPECT_EQ(malformed.status, 400);
  EXPECT_EQ(error_code(malformed), "INVALID_INPUT");
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/join", {{"profile", 5}})), "INVALID_INPUT");
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/join", {{"profile", {{"username", ""}}}})), "INVALID_INPUT");
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/signal", {{"message", std::string(501, 'x')}}, a.token)),
            "INVALID_INPUT");
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/message", {{"message", "early"}}, a.token)), "INVALID_INPUT");

  api.post("/v1/networks/" + id + "/signal", json::object(), a.token);
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/rewire", {{"drop_user_id", a.user_id}}, a.token)),
            "INVALID_INPUT");

  // Operator plane.
  EXPECT_EQ(error_code(api.get("/v1/networks/" + id + "/events", a.token)), "FORBIDDEN");
  EXPECT_EQ(error_code(api.post("/v1/networks", {{"k", 2}})), "FORBIDDEN");
  EXPECT_EQ(error_code(api.post("/v1/networks/" + id + "/reset", json::object(), a.token)), "FORBIDDEN");
  EXPECT_EQ(error_code(api.post("/v1/networks", {{"k", 2}, {"game_spec", {{"action", "a"}, {"reward", "r"},
                                                  {"reset_condition", kManual}}}, {"config", {{"network_id", id}}}},
                                "operator-secret")),
            "CONFLICT");
  EXPECT_EQ(error_code(api.post("/v1/networks", {{"k", 0}, {"game_spec", {{"action", "a"}, {"reward", "r"},
                                                  {"reset_condition", kManual}}}}, "operator-secret")),
            "INVALID_INPUT");
}

TEST(ServerApi, PublicChannelAndMemberCountFlag) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto hidden = api.create(3, {{"type", "fraction"}, {"q_reset", 0.75}});
  const auto shown = api.create(3, kManual, {{"expose_member_count", true}});
  join(api, hidden, "a");
  join(api, shown, "a");
  join(api, shown, "b");

  const auto pub = api.get("/v1/networks/" + hidden + "/public");
  ASSERT_EQ(pub.status, 200);
  std::set<std::string> keys;
  for (const auto& [k, v] : pub.body.items()) keys.insert(k);
  EXPECT_EQ(keys, (std::set<std::string>{"game_spec", "k", "phase", "cycle"}));
  EXPECT_EQ(pub.body["game_spec"]["reset_condition"]["q_reset"], 0.75);
  EXPECT_EQ(pub.body["phase"], "forming");

  const auto flagged = api.get("/v1/networks/" + shown + "/public");
  EXPECT_EQ(flagged.body["n"], 2);
  // The flag is part of the logged creation record.
  EXPECT_EQ(api.all_events(shown).front().payload["config"]["expose_member_count"], true);
}

TEST(ServerApi, ThresholdResetFiresOnSignal) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto id = api.create(2, {{"type", "fraction"}, {"q_reset", 1.0}});
  std::vector<Member> m;
  for (int i = 0; i < 4; ++i) m.push_back(join(api, id, "m" + std::to_string(i)));
  for (int i = 0; i < 3; ++i) api.post("/v1/networks/" + id + "/signal", json::object(), m[i].token);
  const auto last = api.post("/v1/networks/" + id + "/signal", {{"message", "go"}}, m[3].token);
  ASSERT_EQ(last.status, 200);
  EXPECT_EQ(last.body["signal"], 0);
  EXPECT_EQ(last.body["message"], "");
  EXPECT_EQ(last.body["cycle"], 1);
  EXPECT_EQ(api.get("/v1/networks/" + id + "/public").body["cycle"], 1);
}

TEST(ServerApi, OperatorResetTickAndLeave) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto id = api.create(2, {{"type", "deadline"}, {"ticks", 2}});
  std::vector<Member> m;
  for (int i = 0; i < 5; ++i) m.push_back(join(api, id, "m" + std::to_string(i)));
  EXPECT_EQ(api.post("/v1/networks/" + id + "/leave", json::object(), m[4].token).status, 200);
  EXPECT_EQ(api.post("/v1/networks/" + id + "/tick", json::object(), "operator-secret").body["fired"], false);
  const auto fired = api.post("/v1/networks/" + id + "/tick", json::object(), "operator-secret");
  EXPECT_EQ(fired.body["fired"], true);
  EXPECT_EQ(fired.body["reason"], "deadline");
  EXPECT_EQ(fired.body["departed"], 1);
  EXPECT_EQ(error_code(api.get("/v1/networks/" + id + "/view", m[4].token)), "NOT_FOUND");
  const auto manual = api.post("/v1/networks/" + id + "/reset", json::object(), "operator-secret");
  EXPECT_EQ(manual.body["reason"], "manual");
  EXPECT_EQ(api.get("/v1/networks/" + id + "/public").body["cycle"], 2);
}

TEST(ServerApi, LongPollReturnsOnChange) {
  TempDir dir;
  LiveServer live(dir.path(), 5.0);
  Api api(live.port());
  const auto id = api.create(2, kManual);
  const auto a = join(api, id, "ada");
  const auto b = join(api, id, "bob");
  join(api, id, "cyd");
  const auto before = api.get("/v1/networks/" + id + "/view", a.token);

  Reply polled;
  auto started = std::chrono::steady_clock::now();
  std::thread waiter([&] {
    Api mine(live.port());
    polled = mine.get("/v1/networks/" + id + "/view?wait=true&known=" + before.etag, a.token);
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  // bob is one of ada's inputs while the network holds K + 1 members.
  api.post("/v1/networks/" + id + "/signal", json::object(), b.token);
  waiter.join();
  const auto waited = std::chrono::steady_clock::now() - started;
  ASSERT_EQ(polled.status, 200);
  EXPECT_NE(polled.etag, before.etag);
  EXPECT_LT(waited, std::chrono::seconds(4));
  bool lit = false;
  for (const auto& card : polled.body["inputs"]) lit |= card["user_id"] == b.user_id && card["signal"] == 1;
  EXPECT_TRUE(lit);

  // A stale etag answers at once.
  started = std::chrono::steady_clock::now();
  const auto stale = api.get("/v1/networks/" + id + "/view?wait=true&known=" + before.etag, a.token);
  EXPECT_LT(std::chrono::steady_clock::now() - started, std::chrono::seconds(1));
  EXPECT_EQ(stale.etag, polled.etag);
}

TEST(ServerApi, LongPollTimesOutUnchanged) {
  TempDir dir;
  LiveServer live(dir.path(), 0.5);
  Api api(live.port());
  const auto id = api.create(2, kManual);
  const auto a = join(api, id, "ada");
  const auto before = api.get("/v1/networks/" + id + "/view", a.token);
  const auto started = std::chrono::steady_clock::now();
  const auto r = api.get("/v1/networks/" + id + "/view?wait=true", a.token);
  const auto waited = std::chrono::steady_clock::now() - started;
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.etag, before.etag);
  EXPECT_GE(waited, std::chrono::milliseconds(450));
}

TEST(ServerApi, TargetedJoinAndRewire) {
  TempDir dir;
  LiveServer live(dir.path());
  Api api(live.port());
  const auto id = api.create(2, kManual);
  std::vector<Member> m;
  for (int i = 0; i < 6; ++i) m.push_back(join(api, id, "m" + std::to_string(i)));
  const auto t = join(api, id, "targeted", {{"targets", {m[0].private_id}}});
  const auto view = api.get("/v1/networks/" + id + "/view", t.token);
  EXPECT_EQ(view.body["inputs"][0]["user_id"], m[0].user_id);

  api.post("/v1/networks/" + id + "/signal", json::object(), t.token);
  std::string keep = view.body["inputs"][1]["user_id"];
  std::string add_pid;
  for (const auto& x : m) {
    if (x.user_id != m[0].user_id && x.user_id != keep) add_pid = x.private_id;
  }
  auto r = api.post("/v1/networks/" + id + "/rewire",
                    {{"drop_user_id", m[0].user_id}, {"add", {{"private_id", add_pid}}}}, t.token);
  // Might refuse when the target already observes us and mutual pairs are off.
  if (r.status == 200) {
    EXPECT_EQ(r.body["inputs"].size(), 2u);
    for (const auto& card : r.body["inputs"]) EXPECT_NE(card["user_id"], m[0].user_id);
  } else {
    EXPECT_EQ(error_code(r), "CONFLICT");
  }
}

TEST(ServerApi, RecoversNetworksAndSessionsAfterRestart) {
  TempDir dir;
  std::string id;
  Member a;
  nlohmann::json before;
  {
    LiveServer live(dir.path());
    Api api(live.port());
    id = api.create(2, kManual);
    a = join(api, id, "ada");
    join(api, id, "bob");
    join(api, id, "cyd");
    api.post("/v1/networks/" + id + "/signal", {{"message", "persist me"}}, a.token);
    before = to_json(*live.service().snapshot(id));
  }
  LiveServer again(dir.path());
  EXPECT_EQ(again.recovery().networks, 1u);
  EXPECT_EQ(again.recovery().sessions, 3u);
  EXPECT_EQ(to_json(*again.service().snapshot(id)), before);
  Api api(again.port());
  const auto v = api.get("/v1/networks/" + id + "/view", a.token);
  ASSERT_EQ(v.status, 200);
  EXPECT_EQ(v.body["message"], "persist me");
}

TEST(ServerApi, TornTailIsDiscardedOnRecovery) {
  TempDir dir;
  std::string id;
  nlohmann::json before;
  {
    LiveServer live(dir.path());
    Api api(live.port());
    id = api.create(2, kManual);
    for (int i = 0; i < 4; ++i) join(api, id, "m" + std::to_string(i));
    before = to_json(*live.service().snapshot(id));
  }
  const auto path = dir.path() + "/networks/" + id + ".log";
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << R"({"seq":99,"tick":0,"kind":"Joi)";
  }
  LiveServer again(dir.path());
  EXPECT_EQ(again.recovery().torn_tails, 1u);
  EXPECT_EQ(to_json(*again.service().snapshot(id)), before);
  std::ifstream in(path, std::ios::binary);
  const auto prefix = read_log_prefix(in);
  EXPECT_FALSE(prefix.torn_tail);
}

TEST(ServerApi, IncompleteFinalOperationIsTrimmed) {
  TempDir dir;
  std::string id;
  std::vector<Event> log;
  {
    LiveServer live(dir.path());
    Api api(live.port());
    id = api.create(2, kManual);
    for (int i = 0; i < 6; ++i) join(api, id, "m" + std::to_string(i));
    log = api.all_events(id);
  }
  // Rewrite the file with the last Linked record of the final join missing.
  ASSERT_EQ(log.back().kind, EventKind::Linked);
  const auto path = dir.path() + "/networks/" + id + ".log";
  {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    std::vector<Event> partial(log.begin(), log.end() - 1);
    write_log(out, partial);
  }
  LiveServer again(dir.path());
  const auto state = again.service().snapshot(id);
  EXPECT_EQ(state->size(), 5u);
  EXPECT_TRUE(check_invariants(*state).empty());
}

// ≥ 8 concurrent clients and ≥ 10^3 requests against one network.
TEST(ServerFuzz, ConcurrentClientsYieldSerializableLog) {
  TempDir dir;
  const auto r = server_fuzz(dir.path(), 8, 150, 99);
  EXPECT_GE(r.requests, 1000);
  EXPECT_EQ(r.server_errors, 0);
  EXPECT_TRUE(r.unexpected.empty()) << r.unexpected.begin()->second;
  EXPECT_GT(r.successes, 500);
  EXPECT_GT(r.bodies_checked, 300u);
  EXPECT_TRUE(r.privacy_violations.empty()) << r.privacy_violations.front();
  EXPECT_TRUE(r.gapless);
  EXPECT_TRUE(r.verify_violations.empty()) << r.verify_violations.front();
  // The served state is the replay of the served log, and the log is what
  // one sequential execution of the requests yields.
  EXPECT_TRUE(r.replay_matches);
  EXPECT_TRUE(r.sequential_matches);
}

TEST(ServerCrash, KillAndReplayReproducesState) {
  TempDir dir;
  const auto r = kill_and_replay(dir.path());
  EXPECT_GT(r.acknowledged_events, 12u);
  EXPECT_TRUE(r.state_matches);
  EXPECT_TRUE(r.signal_survived);
  EXPECT_TRUE(r.view_matches);
}

TEST(ServerCrash, KillUnderLoadKeepsAcknowledgedWrites) {
  TempDir dir;
  std::string id;
  std::mutex mu;
  std::vector<std::string> acked_joins;
  std::vector<std::string> acked_signals;
  {
    ForkedServer child(dir.path());
    Api admin(child.port());
    id = admin.create(3, kManual, {{"seed", 11}});
    std::atomic<bool> stop{false};
    std::vector<std::thread> load;
    for (int c = 0; c < 8; ++c) {
      load.emplace_back([&, c] {
        Api api(child.port());
        for (int i = 0; !stop; ++i) {
          const auto r = api.post("/v1/networks/" + id + "/join",
                                  {{"profile", {{"username", "u" + std::to_string(c) + "-" + std::to_string(i)}}}});
          if (r.status != 201) break;
          {
            std::lock_guard lock(mu);
            acked_joins.push_back(r.body["user_id"]);
          }
          const auto s = api.post("/v1/networks/" + id + "/signal", json::object(), r.body["session_token"]);
          if (s.status != 200) break;
          std::lock_guard lock(mu);
          acked_signals.push_back(r.body["user_id"]);
        }
      });
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(700));
    child.kill();
    stop = true;
    for (auto& t : load) t.join();
  }
  ASSERT_GT(acked_joins.size(), 10u);

  LiveServer recovered(dir.path());
  const auto state = recovered.service().snapshot(id);
  EXPECT_TRUE(check_invariants(*state).empty());
  std::ifstream in(dir.path() + "/networks/" + id + ".log", std::ios::binary);
  const auto log = read_log(in);
  EXPECT_TRUE(verify_log(log).ok());
  EXPECT_EQ(Network::replay(log).state(), *state);
  for (const auto& u : acked_joins) EXPECT_TRUE(state->find(UserId::parse(u))) << u;
  for (const auto& u : acked_signals) EXPECT_TRUE(state->find(UserId::parse(u))->signal.active) << u;
}

}  // namespace
}  // namespace gridt::testing
