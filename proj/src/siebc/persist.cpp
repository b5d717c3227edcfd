#include "sentdyn/siebc/persist.hpp"

#include <map>

#include "sentdyn/csv.hpp"
#include "sentdyn/error.hpp"

namespace sentdyn::siebc {

void write_draws(const PosteriorDraws& draws, const std::string& draws_path, const std::string& latent_path) {
    const std::size_t thin = std::max<std::size_t>(draws.config.sampler.latent_thin, 1);
    CsvWriter d(draws_path);
    d.header({"user", "chain", "draw", "alpha_e", "alpha_u", "epsilon", "sigma_e", "sigma_u"});
    CsvWriter l(latent_path);
    l.header({"user", "chain", "draw", "event_index", "u"});
    for (const auto& up : draws.users) {
        for (std::size_t c = 0; c < up.chains; ++c) {
            for (std::size_t k = 0; k < up.draws; ++k) {
                const Params& p = up.sample(c, k);
                d.cell(up.user).cell(c).cell(k);
                for (std::size_t j = 0; j < kParamCount; ++j) d.cell(get(p, j));
                d.end_row();
            }
            for (std::size_t s = 0; s < up.latent_draws; ++s) {
                const auto tr = up.trajectory(c, s);
                for (std::size_t e = 0; e < tr.size(); ++e) {
                    l.cell(up.user).cell(c).cell(up.trajectory_draw(s, thin)).cell(e).cell(tr[e]).end_row();
                }
            }
        }
    }
}

namespace {

std::size_t to_size(const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); }

} // namespace

PosteriorDraws read_draws(const std::string& draws_path, const std::string& latent_path, Topic topic) {
    const CsvTable dt = read_csv(draws_path);
    const CsvTable lt = read_csv(latent_path);
    PosteriorDraws out;
    std::map<std::string, std::size_t> index;
    auto user_slot = [&](const std::string& name) -> UserPosterior& {
        auto [it, inserted] = index.emplace(name, out.users.size());
        if (inserted) {
            out.users.emplace_back();
            out.users.back().user = name;
            out.users.back().topic = topic;
        }
        return out.users[it->second];
    };

    try {
        const std::size_t cu = dt.column("user"), cc = dt.column("chain"), cd = dt.column("draw");
        std::array<std::size_t, kParamCount> cp{};
        for (std::size_t j = 0; j < kParamCount; ++j) cp[j] = dt.column(kParamNames[j]);
        std::map<std::string, std::vector<std::tuple<std::size_t, std::size_t, Params>>> rows;
        for (const auto& r : dt.rows) {
            Params p;
            for (std::size_t j = 0; j < kParamCount; ++j) set(p, j, std::stod(r[cp[j]]));
            user_slot(r[cu]);
            rows[r[cu]].emplace_back(to_size(r[cc]), to_size(r[cd]), p);
        }
        for (auto& up : out.users) {
            const auto& rs = rows[up.user];
            for (const auto& [c, d, p] : rs) {
                up.chains = std::max(up.chains, c + 1);
                up.draws = std::max(up.draws, d + 1);
            }
            if (rs.size() != up.chains * up.draws) throw DataError("incomplete draws for user '" + up.user + "'");
            up.samples.assign(rs.size(), Params{});
            for (const auto& [c, d, p] : rs) up.samples[c * up.draws + d] = p;
        }

        const std::size_t lu = lt.column("user"), lc = lt.column("chain"), ld = lt.column("draw"),
                          le = lt.column("event_index"), lv = lt.column("u");
        std::map<std::string, std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double>> lat;
        for (const auto& r : lt.rows) lat[r[lu]][{to_size(r[lc]), to_size(r[ld]), to_size(r[le])}] = std::stod(r[lv]);
        std::size_t thin = 1;
        for (auto& up : out.users) {
            const auto& m = lat[up.user];
            std::map<std::size_t, bool> draw_ids;
            std::size_t length = 0;
            for (const auto& [key, v] : m) {
                draw_ids[std::get<1>(key)] = true;
                length = std::max(length, std::get<2>(key) + 1);
            }
            up.latent_length = length;
            up.latent_draws = draw_ids.size();
            if (draw_ids.size() > 1) thin = std::next(draw_ids.begin())->first - draw_ids.begin()->first;
            if (m.size() != up.chains * up.latent_draws * up.latent_length) {
                throw DataError("incomplete latent trajectories for user '" + up.user + "'");
            }
            up.latent.assign(m.size(), 0.0);
            std::size_t s = 0;
            for (const auto& [draw, unused] : draw_ids) {
                for (std::size_t c = 0; c < up.chains; ++c) {
                    for (std::size_t e = 0; e < up.latent_length; ++e) {
                        up.latent[(c * up.latent_draws + s) * up.latent_length + e] = m.at({c, draw, e});
                    }
                }
                ++s;
            }
            for (std::size_t k = 0; k < kParamCount; ++k) up.rhat[k] = split_rhat(up.parameter_draws(k), up.chains);
        }
        if (!out.users.empty()) {
            out.config.sampler.chains = out.users.front().chains;
            out.config.sampler.draws = out.users.front().draws;
        }
        out.config.sampler.latent_thin = thin;
    } catch (const std::logic_error& e) {
        throw DataError(std::string("malformed posterior files: ") + e.what());
    }
    return out;
}

} // namespace sentdyn::siebc
