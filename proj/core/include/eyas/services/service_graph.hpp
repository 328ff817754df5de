#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

#include "eyas/config.hpp"
#include "eyas/services/client_gateway.hpp"
#include "eyas/services/internal_gateway.hpp"

namespace eyas::services {

enum class Role { client_gateway, internal_gateway, onh, macula, vessels, report };

inline constexpr Role kAllRoles[] = {Role::report,  Role::onh, Role::macula,
                                     Role::vessels, Role::internal_gateway, Role::client_gateway};

std::string_view to_string(Role role) noexcept;
Role parse_role(std::string_view text);
int role_port(const ServiceConfig& service, Role role);

/// Both gateways and all five services in one process, dispatching in memory
/// through the same routers the HTTP deployment serves.
class SingleProcessGraph {
public:
    explicit SingleProcessGraph(const Config& config);
    ~SingleProcessGraph();

    Response dispatch(const Request& request) { return client_->router().dispatch(request); }
    ClientGateway& client() { return *client_; }
    InternalGateway& internal() { return *internal_; }
    const Router& service(Role role) const;

private:
    Config config_;
    std::shared_ptr<BackendRegistry> registry_;
    InProcessTransport transport_;
    Router onh_, macula_, vessels_, report_;
    std::unique_ptr<InternalGateway> internal_;
    std::unique_ptr<ClientGateway> client_;
};

/// Blocks SIGINT and SIGTERM in the calling thread so that threads started
/// afterwards inherit the mask; wait_for_termination() then picks them up.
void block_termination_signals();
int wait_for_termination();

/// Serves one role over HTTP on its configured port until SIGINT/SIGTERM.
/// Downstream services are reached over HTTP at their configured ports.
int run_role(Role role, const Config& config);
/// Serves the single-process graph: the client gateway and the internal
/// gateway listen on their configured ports.
int run_single_process(const Config& config);

/// Child processes `exe serve --role R [--config PATH]`, one per role.
class ProcessGroup {
public:
    ProcessGroup() = default;
    ~ProcessGroup();
    ProcessGroup(const ProcessGroup&) = delete;
    ProcessGroup& operator=(const ProcessGroup&) = delete;

    void start(const std::filesystem::path& exe, const std::optional<std::filesystem::path>& config_path);
    /// Polls every role's /health until all answer or the deadline passes.
    bool wait_ready(const Config& config, double timeout_seconds) const;
    /// SIGTERM to every child, then reaps them; returns the worst exit status.
    int stop();
    const std::vector<pid_t>& pids() const { return pids_; }

private:
    std::vector<pid_t> pids_;
};

/// Multi-process deployment: spawns every role and waits for a signal.
int run_multi_process(const std::filesystem::path& exe, const std::optional<std::filesystem::path>& config_path,
                      const Config& config);

}  // namespace eyas::services
