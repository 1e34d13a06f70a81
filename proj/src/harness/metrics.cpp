#include "manetlab/harness/metrics.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "manetlab/netconfig/ipv4.hpp"
#include "manetlab/sim/errors.hpp"

namespace manetlab::harness {

namespace {

std::string fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

const char* reason_name(link::DropReason r)
{
    switch (r) {
    case link::DropReason::OutOfRange: return "out-of-range";
    case link::DropReason::Unassociated: return "unassociated";
    case link::DropReason::HubLost: return "hub-lost";
    case link::DropReason::NoRoute: return "no-route";
    case link::DropReason::TtlExpired: return "ttl-expired";
    }
    return "?";
}

class CsvFile
{
  public:
    CsvFile(const std::filesystem::path& path, const char* header) : m_path(path.string())
    {
        m_out.open(path);
        if (!m_out)
            throw IoError("cannot write " + m_path);
        m_out << header << "\n";
    }
    template <typename T> CsvFile& operator<<(const T& v)
    {
        m_out << v;
        return *this;
    }
    const std::string& path() const { return m_path; }
    void close()
    {
        m_out.close();
        if (m_out.fail())
            throw IoError("failed writing " + m_path);
    }

  private:
    std::string m_path;
    std::ofstream m_out;
};

} // namespace

double MetricsBundle::mean_goodput_bps(const std::string& flow) const
{
    std::uint64_t bits = 0;
    std::uint64_t seconds = 0;
    for (const ThroughputSample& s : throughput)
        if (s.flow == flow) {
            bits += s.bits;
            ++seconds;
        }
    return seconds ? static_cast<double>(bits) / static_cast<double>(seconds) : 0.0;
}

std::vector<std::string> emit_csv(const MetricsBundle& bundle, const std::string& out_dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    fs::path dir(out_dir);

    std::vector<std::string> written;

    {
        CsvFile f(dir / "throughput.csv", "time_s,flow,bits_per_s");
        for (const ThroughputSample& s : bundle.throughput)
            f << s.time_s << "," << s.flow << "," << s.bits << "\n";
        f.close();
        written.push_back(f.path());
    }

    {
        CsvFile f(dir / "ping.csv", "seq,rtt_ms,lost");
        for (const PingFlowResult& p : bundle.pings) {
            if (!p.series)
                continue;
            for (const diag::PingRecord& r : p.series->records) {
                f << r.seq << ",";
                if (auto rtt = r.rtt_s())
                    f << fixed(*rtt * 1000.0, 3);
                f << "," << (r.lost() ? 1 : 0) << "\n";
            }
        }
        f.close();
        written.push_back(f.path());
    }

    {
        CsvFile f(dir / "battery.csv", "node,percent,interval_s");
        for (const auto& [node, state] : bundle.battery)
            for (const energy::DischargeInterval& iv : energy::discharge_series(state))
                f << node << "," << iv.percent << "," << fixed(iv.interval_s, 6) << "\n";
        f.close();
        written.push_back(f.path());
    }

    {
        CsvFile f(dir / "routes.csv", "node,destination,next_hop,hops,converged_s");
        auto render = [&](routing::Ipv4 ip) -> std::string {
            for (const auto& [node, addr] : bundle.addresses)
                if (addr == ip)
                    return node;
            return netconfig::to_string(ip);
        };
        for (const auto& [node, table] : bundle.final_routes) {
            for (const auto& [dst, entry] : table.entries) {
                std::string dst_name = render(dst);
                std::string conv;
                for (const PairConvergence& pc : bundle.convergence)
                    if (pc.src == node && pc.dst == dst_name && pc.converged_s >= 0)
                        conv = fixed(pc.converged_s, 0);
                f << node << "," << dst_name << "," << render(entry.next_hop) << ","
                  << entry.hop_count << "," << conv << "\n";
            }
        }
        f.close();
        written.push_back(f.path());
    }

    {
        CsvFile f(dir / "drops.csv", "reason,count");
        for (link::DropReason r :
             {link::DropReason::OutOfRange, link::DropReason::Unassociated,
              link::DropReason::HubLost, link::DropReason::NoRoute,
              link::DropReason::TtlExpired}) {
            auto it = bundle.drops.find(r);
            f << reason_name(r) << "," << (it == bundle.drops.end() ? 0 : it->second) << "\n";
        }
        f.close();
        written.push_back(f.path());
    }

    return written;
}

} // namespace manetlab::harness
