#pragma once

// Known rule-sets for the indoor-scene subsets, used as golden inputs.

namespace nesyvit::fixtures {

inline constexpr const char* kRooms2 = R"(target(X,'bathroom') :- bathroom_tiles1_shower_screen1(X).
target(X,'bedroom') :- bed1_duvet1(X).
)";

inline constexpr const char* kRooms3 = R"(target(X,'bedroom') :- not shower_screen1(X).
target(X,'bathroom') :- 
    not refrigerator1_kitchen_island1_range1_countertop1_person1_wall1_air_conditioning1(X).
target(X,'kitchen') :- not bathtub1_mirror1(X).
)";

// Second labelled rule-set for the 3-class subset.
inline constexpr const char* kRooms3Labelled = R"(target(X,'bedroom') :- bed1(X).
target(X,'bathroom') :- not water_cooler1_tray1_refrigerator1_range1(X).
target(X,'kitchen') :- refrigerator2(X).
)";

inline constexpr const char* kRooms5 = R"(target(X,'bathroom') :- toilet1(X).
target(X,'living_room') :- fireplace1(X).
target(X,'dining_room') :- not bed2_railing1(X).
target(X,'bedroom') :- bed1(X).
target(X,'kitchen') :- top1(X).
)";

inline constexpr const char* kRooms10 = R"(target(X,'bedroom') :- bed1(X), not bed2(X).
target(X,'bathroom') :- shower_screen1_mirror1(X).
target(X,'dining_room') :- tablecloth1_bar1(X), not work_surface1_front1_trash_can1(X).
target(X,'office') :- tablecloth1_bar1(X).
target(X,'living_room') :- shelves1(X), not table1_lectern1_floor2_top1(X).
target(X,'conference_room') :- shelves1(X).
target(X,'kitchen') :- floor1(X).
target(X,'hotel_room') :- sofa1_seat1_armchair1_door1_wall1(X).
target(X,'home_office') :- bed1(X).
target(X,'waiting_room') :- bed2(X), not bathtub1(X).
)";

inline constexpr const char* kRooms10Raw = R"(label(X,'bedroom') :- 14(X), not 83(X).
label(X,'bathroom') :- 81(X).
label(X,'dining_room') :- 122(X), not 97(X).
label(X,'office') :- 122(X).
label(X,'living_room') :- 43(X), not 45(X).
label(X,'conference_room') :- 43(X).
label(X,'kitchen') :- 41(X).
label(X,'hotel_room') :- 50(X).
label(X,'home_office') :- 14(X).
label(X,'waiting_room') :- 83(X), not 5(X).
)";

inline constexpr const char* kRooms10Names = R"(14 bed1
83 bed2
81 shower_screen1_mirror1
122 tablecloth1_bar1
97 work_surface1_front1_trash_can1
43 shelves1
45 table1_lectern1_floor2_top1
41 floor1
50 sofa1_seat1_armchair1_door1_wall1
5 bathtub1
)";

}  // namespace nesyvit::fixtures
