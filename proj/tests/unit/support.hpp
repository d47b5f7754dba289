#pragma once

#include "generators.hpp"

#include <doctest.h>

namespace doctest {
template <> struct StringMaker<threatgeo::ThreatEvent> {
	static String convert(const threatgeo::ThreatEvent &ev) {
		return threatgeo::event_to_ndjson(ev).c_str();
	}
};
} // namespace doctest
