// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <riva/env.hpp>
#include <riva/scenario.hpp>
#include <riva/toolkit.hpp>

using namespace riva;

namespace {

const char* kPairSpec = R"(spec pair
resource node0 {
  ip = "10.0.0.10"
  node_id = "0"
}
resource node1 {
  ip = "10.0.0.11"
  node_id = "1"
}
property ip0: attr_equals ip "10.0.0.10" on node0
property reach1: reachable on node1
)";

const char* kShopSpec = R"(spec shop
resource shop-vm {
  ip = "10.4.0.2"
  services = "payments, catalog"
}
property pay_up: service_running on payments
property pay_reach: reachable on payments
property clean: logs_clean "ERROR" on shop-vm
property lat: metric_in_range latency_ms 0 60 on payments
)";

ObservationRequest req(Surface surface, const std::string& target,
                       const std::string& command = "", const std::string& metric = "") {
    ObservationRequest r;
    r.surface = surface;
    r.target = target;
    r.command = command;
    r.metric = metric;
    return r;
}

std::vector<std::string> scenario_files() {
    return {"/s1_ping_stale.json",  "/s2_web_drift.json",     "/s3_detect_healthy.json",
            "/s4_detect_burst.json", "/s5_svc_down.json",     "/s6_metric_anomaly.json"};
}

}  // namespace

TEST_CASE("identical spec and seed deploy byte-identical telemetry") {
    Specification spec = parse_spec(kShopSpec);
    Environment a = Environment::deploy(spec, 99);
    Environment b = Environment::deploy(spec, 99);

    std::vector<ObservationRequest> requests = {
        req(Surface::Logs, "shop-vm"),
        req(Surface::Metrics, "payments"),
        req(Surface::Metrics, "shop-vm", "", "latency_ms"),
        req(Surface::Traces, "catalog"),
        req(Surface::Exec, "shop-vm", "ps"),
        req(Surface::Exec, "shop-vm", "config"),
        req(Surface::Ping, "payments"),
    };
    for (const auto& r : requests) CHECK(a.observe(r) == b.observe(r));
}

TEST_CASE("different seeds change generated telemetry") {
    Specification spec = parse_spec(kShopSpec);
    Environment a = Environment::deploy(spec, 1);
    Environment b = Environment::deploy(spec, 2);
    CHECK(a.observe(req(Surface::Metrics, "payments")) !=
          b.observe(req(Surface::Metrics, "payments")));
}

TEST_CASE("the logical clock orders observations without leaking into output") {
    Specification spec = parse_spec(kShopSpec);
    Environment env = Environment::deploy(spec, 7);

    CHECK(env.clock() == 0);
    std::string first = env.observe(req(Surface::Logs, "shop-vm"));
    CHECK(env.clock() == 1);
    env.observe(req(Surface::Ping, "payments"));
    env.observe(req(Surface::Traces, "payments"));
    CHECK(env.clock() == 3);
    CHECK(env.observe(req(Surface::Logs, "shop-vm")) == first);

    SECTION("validate alone does not advance the clock") {
        std::uint64_t before = env.clock();
        env.validate(req(Surface::Logs, "shop-vm"));
        CHECK_THROWS_AS(env.validate(req(Surface::Logs, "ghost")), EnvError);
        CHECK(env.clock() == before);
    }
}

TEST_CASE("unknown targets and commands raise typed errors") {
    Specification spec = parse_spec(kPairSpec);
    Environment env = Environment::deploy(spec, 3);

    try {
        env.observe(req(Surface::Logs, "node9"));
        FAIL("unknown target accepted");
    } catch (const EnvError& e) {
        CHECK(e.code == EnvError::Code::UnknownTarget);
    }
    try {
        env.observe(req(Surface::Exec, "node0", "reboot"));
        FAIL("non-whitelisted command accepted");
    } catch (const EnvError& e) {
        CHECK(e.code == EnvError::Code::UnsupportedCommand);
    }
    try {
        env.observe(req(Surface::Metrics, "node0", "", "latency_ms"));
        FAIL("metric on metric-less resource accepted");
    } catch (const EnvError& e) {
        CHECK(e.code == EnvError::Code::UnknownTarget);
    }
}

TEST_CASE("exec and ping resolve node_id values through the address table") {
    Specification spec = parse_spec(kPairSpec);
    Environment env = Environment::deploy(spec, 3);

    CHECK(env.observe(req(Surface::Exec, "1", "hostname")) == "node1\n");
    CHECK(env.observe(req(Surface::Exec, "node1", "hostname")) == "node1\n");
    std::string ping = env.observe(req(Surface::Ping, "1"));
    CHECK(ping.find("reply from 10.0.0.11") == 0);
}

TEST_CASE("attribute drift updates config and leaves a phase-dependent log line") {
    Specification spec = parse_spec(kPairSpec);

    SECTION("post-deployment drift logs the config agent warning") {
        Environment env = Environment::deploy(spec, 5);
        env.inject_drift(
            DriftFault{AttributeDrift{"node0", "ip", std::string("10.9.9.9")}});
        CHECK(contains(env.observe(req(Surface::Exec, "node0", "config")),
                       "ip = 10.9.9.9"));
        CHECK(contains(env.observe(req(Surface::Logs, "node0")),
                       "WARN config-agent: ip changed to 10.9.9.9 outside the managed "
                       "workflow"));
        CHECK(env.ground_truth().violated_properties ==
              std::set<PropertyId>{"ip0"});
    }
    SECTION("provisioning drift logs a cloud-init notice instead") {
        Environment env = Environment::deploy(spec, 5);
        env.inject_drift(DriftFault{AttributeDrift{"node0", "ip", std::string("10.9.9.9")},
                                    FaultPhase::Provisioning});
        std::string logs = env.observe(req(Surface::Logs, "node0"));
        CHECK(contains(logs, "NOTICE cloud-init: applied ip=10.9.9.9 on node0"));
        CHECK_FALSE(contains(logs, "WARN config-agent"));
    }
}

TEST_CASE("service down mutates every surface that mentions the service") {
    Specification spec = parse_spec(kShopSpec);
    Environment env = Environment::deploy(spec, 11);
    env.inject_drift(DriftFault{ServiceDown{"shop-vm", "payments"}});

    std::string logs = env.observe(req(Surface::Logs, "shop-vm"));
    CHECK(contains(logs, "ERROR payments: terminated unexpectedly (exit 137)"));
    CHECK(contains(logs, "WARN supervisor: payments not running"));

    std::string metrics = env.observe(req(Surface::Metrics, "payments"));
    CHECK(contains(metrics, "[0.0, 0.0, 0.0, 0.0, 0.0, 0.0] avg=0.0"));

    CHECK(env.observe(req(Surface::Traces, "payments")) ==
          "no spans recorded for payments\n");

    std::string ps = env.observe(req(Surface::Exec, "shop-vm", "ps"));
    CHECK_FALSE(contains(ps, "payments"));
    CHECK(contains(ps, "catalog"));

    CHECK(env.observe(req(Surface::Ping, "payments")) ==
          "request timeout for payments\n");
    ObservationRequest msg = req(Surface::Ping, "payments");
    msg.message_probe = true;
    CHECK(env.observe(msg) == "no ack from payments (timeout)\n");

    GroundTruth gt = env.ground_truth();
    CHECK(gt.violated_properties == std::set<PropertyId>{"clean", "pay_reach", "pay_up"});
    CHECK(gt.faulty_component == "payments");
    CHECK(gt.root_cause == "service_down");
}

TEST_CASE("service down on an undeclared service is rejected") {
    Specification spec = parse_spec(kShopSpec);
    Environment env = Environment::deploy(spec, 11);
    CHECK_THROWS_AS(env.inject_drift(DriftFault{ServiceDown{"shop-vm", "ghost"}}),
                    EnvError);
}

TEST_CASE("stale mapping silently reroutes ping, message, and exec") {
    Specification spec = parse_spec(kPairSpec);
    Environment env = Environment::deploy(spec, 7001);
    env.inject_drift(DriftFault{StaleMapping{"node1", "node0"}});

    CHECK(env.observe(req(Surface::Ping, "1")).find("reply from 10.0.0.10") == 0);
    ObservationRequest msg = req(Surface::Ping, "1");
    msg.message_probe = true;
    CHECK(env.observe(msg) == "message delivered: ack from node0 (10.0.0.10)\n");
    CHECK(env.observe(req(Surface::Exec, "node1", "hostname")) == "node0\n");
    CHECK(env.observe(req(Surface::Exec, "node0", "hostname")) == "node0\n");

    GroundTruth gt = env.ground_truth();
    CHECK(gt.violated_properties == std::set<PropertyId>{"reach1"});
    CHECK(gt.faulty_component == "node1");
    CHECK(gt.root_cause == "stale_mapping");
}

TEST_CASE("metric anomaly scales the series and the trace durations") {
    Specification spec = parse_spec(kShopSpec);
    Environment healthy = Environment::deploy(spec, 13);
    Environment env = Environment::deploy(spec, 13);
    env.inject_drift(DriftFault{MetricAnomaly{"shop-vm", "latency_ms", 10.0}});

    std::string before = healthy.observe(req(Surface::Metrics, "payments", "", "latency_ms"));
    std::string after = env.observe(req(Surface::Metrics, "payments", "", "latency_ms"));
    CHECK(before != after);

    // Spot check one value: the first sample must be exactly 10x (one
    // decimal kept on both sides).
    auto first_sample = [](const std::string& rendered) {
        auto lb = rendered.find('[');
        auto comma = rendered.find(',', lb);
        return std::stod(rendered.substr(lb + 1, comma - lb - 1));
    };
    CHECK(first_sample(after) == Catch::Approx(first_sample(before) * 10.0).margin(1e-9));

    CHECK(healthy.observe(req(Surface::Traces, "payments")) !=
          env.observe(req(Surface::Traces, "payments")));

    // requests_per_sec is untouched.
    CHECK(healthy.observe(req(Surface::Metrics, "payments", "", "requests_per_sec")) ==
          env.observe(req(Surface::Metrics, "payments", "", "requests_per_sec")));

    CHECK(env.ground_truth().violated_properties == std::set<PropertyId>{"lat"});
}

TEST_CASE("metric anomaly on a non-latency metric leaves traces alone") {
    Specification spec = parse_spec(kShopSpec);
    Environment healthy = Environment::deploy(spec, 13);
    Environment env = Environment::deploy(spec, 13);
    env.inject_drift(DriftFault{MetricAnomaly{"shop-vm", "error_rate", 100.0}});
    CHECK(healthy.observe(req(Surface::Traces, "payments")) ==
          env.observe(req(Surface::Traces, "payments")));
}

TEST_CASE("log error burst appends three lines and one error span") {
    Specification spec = parse_spec(kShopSpec);
    Environment healthy = Environment::deploy(spec, 17);
    Environment env = Environment::deploy(spec, 17);
    env.inject_drift(DriftFault{LogErrorBurst{"shop-vm", "disk io failure"}});

    std::string logs = env.observe(req(Surface::Logs, "shop-vm"));
    for (int i = 1; i <= 3; ++i)
        CHECK(contains(logs, "ERROR disk io failure (burst " + std::to_string(i) + "/3)"));

    std::string traces = env.observe(req(Surface::Traces, "shop-vm"));
    CHECK(contains(traces, "status=ERROR error=\"disk io failure\""));
    CHECK(healthy.observe(req(Surface::Traces, "shop-vm")) != traces);

    // The burst also shows through the syslog exec path.
    CHECK(contains(env.observe(req(Surface::Exec, "shop-vm", "cat /var/log/syslog")),
                   "ERROR disk io failure"));

    CHECK(env.ground_truth().violated_properties == std::set<PropertyId>{"clean"});
}

TEST_CASE("ground truth agrees with a brute-force property sweep") {
    Specification spec = parse_spec(kShopSpec);
    std::vector<DriftFault> faults = {
        DriftFault{ServiceDown{"shop-vm", "payments"}},
        DriftFault{MetricAnomaly{"shop-vm", "latency_ms", 50.0}},
        DriftFault{LogErrorBurst{"shop-vm", "oom"}},
        DriftFault{AttributeDrift{"shop-vm", "ip", std::string("0.0.0.0")}},
    };
    for (const auto& fault : faults) {
        Environment env = Environment::deploy(spec, 23);
        env.inject_drift(fault);
        std::set<PropertyId> expected;
        for (const auto& prop : spec.properties)
            if (!env.evaluate_property(prop)) expected.insert(prop.id);
        GroundTruth gt = env.ground_truth();
        CHECK(gt.violated_properties == expected);
        CHECK(gt.faulty_component == fault_component(fault.kind));
        CHECK(gt.root_cause == fault_kind_name(fault.kind));
    }
}

TEST_CASE("a healthy deployment violates nothing") {
    for (const char* text : {kPairSpec, kShopSpec}) {
        Specification spec = parse_spec(text);
        Environment env = Environment::deploy(spec, 31);
        GroundTruth gt = env.ground_truth();
        CHECK(gt.violated_properties.empty());
        CHECK(gt.faulty_component.empty());
        CHECK(gt.root_cause.empty());
    }
}

TEST_CASE("corpus probes expose each fault on exactly the declared surface count") {
    for (const auto& file : scenario_files()) {
        Scenario scenario = load_scenario(std::string(RIVA_SCENARIO_DIR) + file);
        INFO("scenario " << scenario.id);
        REQUIRE_FALSE(scenario.probes.empty());

        Environment healthy = Environment::deploy(scenario.spec, scenario.seed);
        Environment faulted = scenario.deploy_env();
        ToolRegistry registry = default_registry();
        ToolFaultConfig no_faults;

        std::size_t differing = 0;
        for (const auto& [tool, args] : scenario.probes) {
            ToolCall call;
            call.tool_name = tool;
            call.arguments = args;
            ToolOutcome before = invoke(registry, call, healthy, no_faults);
            ToolOutcome after = invoke(registry, call, faulted, no_faults);
            INFO("probe " << call.display());
            REQUIRE(before.ok());
            REQUIRE(after.ok());
            if (before.output != after.output) ++differing;
        }
        if (scenario.faults.empty()) {
            CHECK(differing == 0);
        } else {
            CHECK(differing == scenario.surfaces_per_property);
            CHECK(differing >= 2);
        }
    }
}

TEST_CASE("corpus ground truth matches each scenario's designed outcome") {
    struct Expect {
        std::string file;
        std::string component;
        std::string cause;
    };
    std::vector<Expect> table = {
        {"/s1_ping_stale.json", "node1", "stale_mapping"},
        {"/s2_web_drift.json", "web", "attribute_drift"},
        {"/s3_detect_healthy.json", "", ""},
        {"/s4_detect_burst.json", "api-vm", "log_error_burst"},
        {"/s5_svc_down.json", "payments", "service_down"},
        {"/s6_metric_anomaly.json", "db-vm", "metric_anomaly"},
    };
    for (const auto& expect : table) {
        Scenario scenario = load_scenario(std::string(RIVA_SCENARIO_DIR) + expect.file);
        Environment env = scenario.deploy_env();
        GroundTruth gt = scenario.effective_ground_truth(env);
        INFO("scenario " << scenario.id);
        CHECK(gt.faulty_component == expect.component);
        CHECK(gt.root_cause == expect.cause);
        CHECK(gt.violated_properties.empty() == scenario.faults.empty());
    }
}
