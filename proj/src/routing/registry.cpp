#include "manetlab/routing/plugin.hpp"

#include "manetlab/routing/olsr.hpp"
#include "manetlab/routing/static_routing.hpp"
#include "manetlab/sim/errors.hpp"

namespace manetlab::routing {

const RoutingPackage& PackageRegistry::register_package(RoutingPackage pkg)
{
    if (find(pkg.name))
        throw DuplicatePackage("routing package already registered: " + pkg.name);
    m_packages.push_back(std::move(pkg));
    return m_packages.back();
}

const RoutingPackage* PackageRegistry::find(const std::string& name) const
{
    for (const auto& pkg : m_packages)
        if (pkg.name == name)
            return &pkg;
    return nullptr;
}

std::vector<std::string> PackageRegistry::names() const
{
    std::vector<std::string> out;
    for (const auto& pkg : m_packages)
        out.push_back(pkg.name);
    return out;
}

PackageRegistry PackageRegistry::with_builtins()
{
    PackageRegistry registry;

    RoutingPackage olsr;
    olsr.name = "olsr";
    olsr.version = "1.0";
    olsr.start_hook = "olsrd start";
    olsr.stop_hook = "olsrd stop";
    olsr.factory = [](RouterHost host, const nlohmann::json& params) {
        return std::make_unique<OlsrPlugin>(std::move(host), OlsrParams::from_json(params));
    };
    registry.register_package(std::move(olsr));

    RoutingPackage fixed;
    fixed.name = "static";
    fixed.version = "1.0";
    fixed.start_hook = "ip route add";
    fixed.stop_hook = "ip route flush";
    fixed.factory = [](RouterHost host, const nlohmann::json& params) {
        return std::make_unique<StaticPlugin>(std::move(host),
                                              StaticPlugin::table_from_json(params));
    };
    registry.register_package(std::move(fixed));

    return registry;
}

const RoutingPackage& PackageRegistry::load_manifest(const std::string& json_text)
{
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string{"package manifest: "} + e.what());
    }
    if (!manifest.contains("name") || !manifest.contains("protocol"))
        throw ValidationError("package manifest needs 'name' and 'protocol'");

    std::string protocol = manifest.at("protocol").get<std::string>();
    const RoutingPackage* base = find(protocol);
    if (!base)
        throw ValidationError("package manifest references unknown protocol: " + protocol);

    RoutingPackage pkg;
    pkg.name = manifest.at("name").get<std::string>();
    pkg.version = manifest.value("version", std::string{"0.0"});
    pkg.start_hook = manifest.value("start_hook", base->start_hook);
    pkg.stop_hook = manifest.value("stop_hook", base->stop_hook);
    pkg.params = manifest.value("params", nlohmann::json::object());
    pkg.factory = base->factory;
    return register_package(std::move(pkg));
}

} // namespace manetlab::routing
