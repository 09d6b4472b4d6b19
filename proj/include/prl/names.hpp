#pragma once

#include <array>
#include <string_view>

namespace prl::names {

// Given and family names, most frequent first. Samplers weight rank r by
// 1/(r + offset), a flattened Zipf law whose head shares are close to those
// of real name registers.
inline constexpr std::array<std::string_view, 318> given = {
    "james", "mary", "john", "patricia", "robert", "jennifer", "michael", "linda", "william", "elizabeth",
    "david", "barbara", "richard", "susan", "joseph", "jessica", "thomas", "sarah", "charles", "karen",
    "christopher", "nancy", "daniel", "lisa", "matthew", "betty", "anthony", "margaret", "mark", "sandra",
    "donald", "ashley", "steven", "kimberly", "paul", "emily", "andrew", "donna", "joshua", "michelle",
    "kenneth", "dorothy", "kevin", "carol", "brian", "amanda", "george", "melissa", "edward", "deborah",
    "ronald", "stephanie", "timothy", "rebecca", "jason", "sharon", "jeffrey", "laura", "ryan", "cynthia",
    "jacob", "kathleen", "gary", "amy", "nicholas", "shirley", "eric", "angela", "jonathan", "helen",
    "stephen", "anna", "larry", "brenda", "justin", "pamela", "scott", "nicole", "brandon", "emma",
    "benjamin", "samantha", "samuel", "katherine", "gregory", "christine", "frank", "debra", "alexander", "rachel",
    "raymond", "catherine", "patrick", "carolyn", "jack", "janet", "dennis", "ruth", "jerry", "maria",
    "tyler", "heather", "aaron", "diane", "jose", "virginia", "adam", "julie", "henry", "joyce",
    "nathan", "victoria", "douglas", "olivia", "zachary", "kelly", "peter", "christina", "kyle", "lauren",
    "walter", "joan", "ethan", "evelyn", "jeremy", "judith", "harold", "megan", "keith", "cheryl",
    "christian", "andrea", "roger", "hannah", "noah", "martha", "gerald", "jacqueline", "carl", "frances",
    "terry", "gloria", "sean", "ann", "austin", "teresa", "arthur", "kathryn", "lawrence", "sara",
    "jesse", "janice", "dylan", "jean", "bryan", "alice", "joe", "madison", "jordan", "doris",
    "billy", "abigail", "bruce", "julia", "albert", "judy", "willie", "grace", "gabriel", "denise",
    "logan", "amber", "alan", "marilyn", "juan", "beverly", "wayne", "danielle", "roy", "theresa",
    "ralph", "sophia", "randy", "marie", "eugene", "diana", "vincent", "brittany", "russell", "natalie",
    "elijah", "isabella", "louis", "charlotte", "bobby", "rose", "philip", "alexis", "johnny", "kayla",
    "bradley", "lillian", "tiffany", "clarence", "irene", "norma", "howard", "paula", "leonard", "lois",
    "travis", "peggy", "carlos", "wanda", "craig", "rita", "fred", "dawn", "mario", "crystal",
    "victor", "edna", "martin", "tammy", "shane", "mildred", "chad", "ellen", "todd", "yvonne",
    "derek", "gina", "jared", "renee", "marvin", "leslie", "lee", "sally", "harry", "ida",
    "ricardo", "tonya", "stanley", "wendy", "antonio", "velma", "jimmy", "colleen", "curtis", "sheila",
    "glenn", "hazel", "leroy", "ruby", "herbert", "eileen", "clifford", "vera", "bernard", "lorraine",
    "ernest", "connie", "jay", "sylvia", "troy", "jill", "alfred", "holly", "nelson", "lucy",
    "luis", "vivian", "dale", "stacy", "ray", "bonnie", "manuel", "rosa", "jorge", "agnes",
    "edgar", "gertrude", "allen", "joanne", "oscar", "erin", "lloyd", "tracy", "francis", "edith",
    "vernon", "eva", "tony", "elaine", "gordon", "ethel", "leon", "alma", "milton", "annie",
    "darren", "becky", "alvin", "audrey", "rodney", "lucille", "warren", "jo", "jerome", "yolanda",
    "cecil", "rosemary", "lester", "nellie", "floyd", "delores", "clyde", "lynn"};

inline constexpr std::array<std::string_view, 399> family = {
    "smith", "johnson", "williams", "brown", "jones", "garcia", "miller", "davis", "rodriguez", "martinez",
    "hernandez", "lopez", "gonzalez", "wilson", "anderson", "thomas", "taylor", "moore", "jackson", "martin",
    "lee", "perez", "thompson", "white", "harris", "sanchez", "clark", "ramirez", "lewis", "robinson",
    "walker", "young", "allen", "king", "wright", "scott", "torres", "nguyen", "hill", "flores",
    "green", "adams", "nelson", "baker", "hall", "rivera", "campbell", "mitchell", "carter", "roberts",
    "gomez", "phillips", "evans", "turner", "diaz", "parker", "cruz", "edwards", "collins", "reyes",
    "stewart", "morris", "morales", "murphy", "cook", "rogers", "gutierrez", "ortiz", "morgan", "cooper",
    "peterson", "bailey", "reed", "kelly", "howard", "ramos", "kim", "cox", "ward", "richardson",
    "watson", "brooks", "chavez", "wood", "james", "bennett", "gray", "mendoza", "ruiz", "hughes",
    "price", "alvarez", "castillo", "sanders", "patel", "myers", "long", "ross", "foster", "jimenez",
    "powell", "jenkins", "perry", "russell", "sullivan", "bell", "coleman", "butler", "henderson", "barnes",
    "gonzales", "fisher", "vasquez", "simmons", "romero", "jordan", "patterson", "alexander", "hamilton", "graham",
    "reynolds", "griffin", "wallace", "moreno", "west", "cole", "hayes", "bryant", "herrera", "gibson",
    "ellis", "tran", "medina", "aguilar", "stevens", "murray", "ford", "castro", "marshall", "owens",
    "harrison", "fernandez", "mcdonald", "woods", "washington", "kennedy", "wells", "vargas", "henry", "chen",
    "freeman", "webb", "tucker", "guzman", "burns", "crawford", "olson", "simpson", "porter", "hunter",
    "gordon", "mendez", "silva", "shaw", "snyder", "mason", "dixon", "munoz", "hunt", "hicks",
    "holmes", "palmer", "wagner", "black", "robertson", "boyd", "rose", "stone", "salazar", "fox",
    "warren", "mills", "meyer", "rice", "schmidt", "garza", "daniels", "ferguson", "nichols", "stephens",
    "soto", "weaver", "ryan", "gardner", "payne", "grant", "dunn", "kelley", "spencer", "hawkins",
    "arnold", "pierce", "vazquez", "hansen", "peters", "santos", "hart", "bradley", "knight", "elliott",
    "cunningham", "duncan", "armstrong", "hudson", "carroll", "lane", "riley", "andrews", "alvarado", "ray",
    "delgado", "berry", "perkins", "hoffman", "johnston", "matthews", "pena", "richards", "contreras", "willis",
    "carpenter", "lawrence", "sandoval", "guerrero", "george", "chapman", "rios", "estrada", "ortega", "watkins",
    "greene", "nunez", "wheeler", "valdez", "harper", "burke", "larson", "santiago", "maldonado", "morrison",
    "franklin", "carlson", "austin", "dominguez", "carr", "lawson", "jacobs", "obrien", "lynch", "singh",
    "vega", "bishop", "montgomery", "oliver", "jensen", "harvey", "williamson", "gilbert", "dean", "sims",
    "espinoza", "howell", "li", "wong", "reid", "hanson", "le", "mccoy", "garrett", "burton",
    "fuller", "wang", "weber", "welch", "rojas", "lucas", "marquez", "fields", "park", "yang",
    "little", "banks", "padilla", "day", "walsh", "bowman", "schultz", "luna", "fowler", "mejia",
    "davidson", "acosta", "brewer", "may", "holland", "juarez", "newman", "pearson", "curtis", "cortez",
    "douglas", "schneider", "joseph", "barrett", "navarro", "figueroa", "keller", "avila", "wade", "molina",
    "stanley", "hopkins", "campos", "barnett", "bates", "chambers", "caldwell", "beck", "lambert", "miranda",
    "byrd", "craig", "ayala", "lowe", "frazier", "powers", "neal", "leonard", "gregory", "carrillo",
    "sutton", "fleming", "rhodes", "shelton", "schwartz", "norris", "jennings", "watts", "duran", "walters",
    "cohen", "mcdaniel", "moran", "parks", "steele", "vaughn", "becker", "holt", "deleon", "barker",
    "terry", "hale", "leon", "hail", "benson", "haynes", "horton", "miles", "lyons", "pham",
    "graves", "bush", "thornton", "wolfe", "warner", "cabrera", "mckinney", "mann", "zimmerman", "dawson",
    "lara", "fletcher", "page", "mccarthy", "love", "robles", "cervantes", "solis", "erickson", "reeves",
    "chang", "klein", "salinas", "fuentes", "baldwin", "daniel", "simon", "velasquez", "hardy"};

}  // namespace prl::names
