#include "manetlab/routing/static_routing.hpp"

#include "manetlab/sim/errors.hpp"

namespace manetlab::routing {

StaticPlugin::StaticPlugin(RouterHost host, RouteTable table)
    : m_host(std::move(host)), m_table(std::move(table))
{
}

RouteTable StaticPlugin::table_from_json(const nlohmann::json& params)
{
    RouteTable table;
    if (!params.contains("routes"))
        return table;
    for (const auto& [dst_text, entry] : params.at("routes").items()) {
        auto dst = netconfig::parse_ipv4(dst_text);
        auto via = netconfig::parse_ipv4(entry.value("next_hop", std::string{}));
        if (!dst || !via)
            throw ValidationError("static route needs valid dst and next_hop addresses");
        table.entries[*dst] = {*via, entry.value("hops", 1)};
    }
    return table;
}

} // namespace manetlab::routing
