#pragma once

#include <string>

#include "sentdyn/siebc/fit.hpp"

namespace sentdyn::siebc {

// draws CSV:  user,chain,draw,alpha_e,alpha_u,epsilon,sigma_e,sigma_u
// latent CSV: user,chain,draw,event_index,u  (event_index 0 = initial state)
void write_draws(const PosteriorDraws& draws, const std::string& draws_path, const std::string& latent_path);

// Restores samples and trajectories. Timestamps are not part of the files;
// callers attach them from the matching timelines.
PosteriorDraws read_draws(const std::string& draws_path, const std::string& latent_path, Topic topic);

} // namespace sentdyn::siebc
