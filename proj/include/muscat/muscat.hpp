#ifndef MUSCAT_MUSCAT_HPP
#define MUSCAT_MUSCAT_HPP

// Umbrella header for the small-obstacle elastic scattering toolkit:
// forward far-field synthesis through the point-interaction model, MUSIC
// localization, and capacitance-based size estimation.

#include "muscat/types.hpp"
#include "muscat/medium.hpp"
#include "muscat/green.hpp"
#include "muscat/mesh.hpp"
#include "muscat/bem.hpp"
#include "muscat/foldy_lax.hpp"
#include "muscat/acquisition.hpp"
#include "muscat/music.hpp"
#include "muscat/sizing.hpp"
#include "muscat/io.hpp"

#endif
