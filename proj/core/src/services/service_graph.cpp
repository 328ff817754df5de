#include "eyas/services/service_graph.hpp"

#include <csignal>
#include <cstdio>
#include <pthread.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "eyas/services/structure_services.hpp"

namespace eyas::services {

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::client_gateway: return "client_gateway";
        case Role::internal_gateway: return "internal_gateway";
        case Role::onh: return "onh";
        case Role::macula: return "macula";
        case Role::vessels: return "vessels";
        case Role::report: return "report";
    }
    return "client_gateway";
}

Role parse_role(std::string_view text) {
    for (Role r : kAllRoles)
        if (to_string(r) == text) return r;
    fail(ErrorCode::invalid_argument, "unknown role '" + std::string(text) + "'");
}

int role_port(const ServiceConfig& service, Role role) {
    switch (role) {
        case Role::client_gateway: return service.ports.client_gateway;
        case Role::internal_gateway: return service.ports.internal_gateway;
        case Role::onh: return service.ports.onh;
        case Role::macula: return service.ports.macula;
        case Role::vessels: return service.ports.vessels;
        case Role::report: return service.ports.report;
    }
    return 0;
}

SingleProcessGraph::SingleProcessGraph(const Config& config)
    : config_(config),
      registry_(std::make_shared<BackendRegistry>()),
      onh_(make_onh_service(config, registry_)),
      macula_(make_macula_service(config, registry_)),
      vessels_(make_vessels_service(config, registry_)),
      report_(make_report_service(config)) {
    transport_.bind("onh", &onh_);
    transport_.bind("macula", &macula_);
    transport_.bind("vessels", &vessels_);
    transport_.bind("report", &report_);
    internal_ = std::make_unique<InternalGateway>(config_, registry_, transport_);
    transport_.bind("internal", &internal_->router());
    client_ = std::make_unique<ClientGateway>(config_, transport_);
}

SingleProcessGraph::~SingleProcessGraph() {
    // Workers may still be dispatching through the routers below.
    client_.reset();
}

const Router& SingleProcessGraph::service(Role role) const {
    switch (role) {
        case Role::client_gateway: return client_->router();
        case Role::internal_gateway: return internal_->router();
        case Role::onh: return onh_;
        case Role::macula: return macula_;
        case Role::vessels: return vessels_;
        case Role::report: return report_;
    }
    return onh_;
}

namespace {

sigset_t termination_set() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    return set;
}

void bind_http(HttpTransport& transport, const ServiceConfig& service) {
    for (Role r : {Role::onh, Role::macula, Role::vessels, Role::report}) {
        transport.bind(std::string(to_string(r)), service.host, role_port(service, r));
    }
    transport.bind("internal", service.host, service.ports.internal_gateway);
}

int serve(const Router& router, const Config& config, int port) {
    HttpServer server(router, config.service.max_upload_bytes + (1u << 20));
    server.start(config.service.host, port);
    std::fprintf(stderr, "listening on %s:%d\n", config.service.host.c_str(), server.port());
    const int sig = wait_for_termination();
    server.stop();
    return sig == SIGINT || sig == SIGTERM ? 0 : 1;
}

}  // namespace

void block_termination_signals() {
    const sigset_t set = termination_set();
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

int wait_for_termination() {
    const sigset_t set = termination_set();
    int sig = 0;
    sigwait(&set, &sig);
    return sig;
}

int run_role(Role role, const Config& config) {
    block_termination_signals();
    const int port = role_port(config.service, role);
    auto registry = std::make_shared<BackendRegistry>();
    HttpTransport transport(config.service.call_timeout_seconds);
    bind_http(transport, config.service);
    switch (role) {
        case Role::onh: return serve(make_onh_service(config, registry), config, port);
        case Role::macula: return serve(make_macula_service(config, registry), config, port);
        case Role::vessels: return serve(make_vessels_service(config, registry), config, port);
        case Role::report: return serve(make_report_service(config), config, port);
        case Role::internal_gateway: {
            InternalGateway gateway(config, registry, transport);
            return serve(gateway.router(), config, port);
        }
        case Role::client_gateway: {
            ClientGateway gateway(config, transport);
            return serve(gateway.router(), config, port);
        }
    }
    return 2;
}

int run_single_process(const Config& config) {
    block_termination_signals();
    SingleProcessGraph graph(config);
    const std::size_t max_body = config.service.max_upload_bytes + (1u << 20);
    HttpServer client(graph.client().router(), max_body);
    HttpServer internal(graph.internal().router(), max_body);
    client.start(config.service.host, config.service.ports.client_gateway);
    internal.start(config.service.host, config.service.ports.internal_gateway);
    std::fprintf(stderr, "listening on %s:%d (client) and :%d (internal)\n", config.service.host.c_str(),
                 client.port(), internal.port());
    wait_for_termination();
    client.stop();
    internal.stop();
    return 0;
}

ProcessGroup::~ProcessGroup() {
    if (!pids_.empty()) stop();
}

void ProcessGroup::start(const std::filesystem::path& exe, const std::optional<std::filesystem::path>& config_path) {
    for (Role role : kAllRoles) {
        std::vector<std::string> args{exe.string(), "serve", "--role", std::string(to_string(role))};
        if (config_path) {
            args.push_back("--config");
            args.push_back(config_path->string());
        }
        const pid_t pid = fork();
        if (pid < 0) {
            stop();
            fail(ErrorCode::io, "fork failed");
        }
        if (pid == 0) {
            sigset_t none;
            sigemptyset(&none);
            pthread_sigmask(SIG_SETMASK, &none, nullptr);
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            argv.push_back(nullptr);
            execv(argv[0], argv.data());
            std::_Exit(127);
        }
        pids_.push_back(pid);
    }
}

bool ProcessGroup::wait_ready(const Config& config, double timeout_seconds) const {
    HttpTransport probe(2.0);
    for (Role role : kAllRoles) probe.bind(std::string(to_string(role)), config.service.host, role_port(config.service, role));
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
    for (Role role : kAllRoles) {
        Request req;
        req.path = "/health";
        while (!probe.send(std::string(to_string(role)), req).ok()) {
            if (std::chrono::steady_clock::now() > deadline) return false;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    return true;
}

int ProcessGroup::stop() {
    for (pid_t pid : pids_) kill(pid, SIGTERM);
    int worst = 0;
    for (pid_t pid : pids_) {
        int status = 0;
        if (waitpid(pid, &status, 0) < 0) continue;
        const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        worst = std::max(worst, code);
    }
    pids_.clear();
    return worst;
}

int run_multi_process(const std::filesystem::path& exe, const std::optional<std::filesystem::path>& config_path,
                      const Config& config) {
    block_termination_signals();
    ProcessGroup group;
    group.start(exe, config_path);
    if (!group.wait_ready(config, 30.0)) {
        std::fprintf(stderr, "services did not become ready\n");
        group.stop();
        return 1;
    }
    std::fprintf(stderr, "all services ready; client gateway on %s:%d\n", config.service.host.c_str(),
                 config.service.ports.client_gateway);
    wait_for_termination();
    return group.stop() == 0 ? 0 : 1;
}

}  // namespace eyas::services
