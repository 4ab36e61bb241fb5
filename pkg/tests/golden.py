"""Published example triples the starter registry must render verbatim.

Each fixture is (template id, slot lemmas, premise, hypothesis,
explanation) with the prose exactly as published; tests tokenize the
prose before comparing, which detaches sentence punctuation.
"""

GOLDEN_TRIPLES = [
    (
        "lo-prep-sps",
        {"X": "psychologist", "P": "by", "Y": "programmer", "V": "see", "Z": "essayist"},
        "the psychologist by the programmers saw the essayist.",
        "the psychologist saw the essayist.",
        "the psychologist by the programmers is still the psychologist.",
    ),
    (
        "lo-relsubj-iv-pp",
        {"X": "scientist", "V1": "talk", "V2": "thank", "Y": "psychotherapist"},
        "the scientists that talked thanked the psychotherapists.",
        "the scientists thanked the psychotherapists.",
        "the scientists that talked are still the scientists.",
    ),
    (
        "con-ifiv-pp",
        {"X": "psychologist", "V1": "run", "Y": "programmer", "V2": "exist"},
        "if the psychologists ran, the programmers existed.",
        "the psychologists ran.",
        "the programmers existed if the psychologists ran, we do not know whether the psychologists ran.",
    ),
    (
        "con-thoughiv-ss",
        {"X": "president", "V1": "vote", "Y": "musician", "V2": "exist"},
        "though the president voted, the musician existed.",
        "the president voted.",
        "though suggests the president voted happened.",
    ),
    (
        "lo-passive-ss",
        {"X": "scientist", "Y": "psychotherapist", "V": "address"},
        "the scientist was addressed by the psychotherapist.",
        "the psychotherapist addressed the scientist.",
        "addressed is the active form of was addressed by, so we swap the scientist and the psychotherapist.",
    ),
    (
        "con-iftv-pps",
        {"X": "director", "V1": "address", "Y": "illustrator", "Z": "president", "V2": "listen"},
        "if the directors addressed the illustrators, the president listened.",
        "the directors addressed the illustrators.",
        "the president listened if the directors addressed the illustrators, we do not know whether the directors addressed the illustrators.",
    ),
    (
        "lo-relobj-pss",
        {"X": "manager", "Y": "baker", "V1": "address", "V2": "bring", "Z": "technician"},
        "the managers who the baker addressed brought the technician.",
        "the baker addressed the managers.",
        "who in who the baker addressed refers to the managers.",
    ),
    (
        "lo-prep-pps",
        {"X": "analyst", "P": "in_front_of", "Y": "programmer", "V": "affect", "Z": "scientist"},
        "the analysts in front of the programmers affected the scientist.",
        "the analysts affected the scientist.",
        "the analysts in front of the programmers are still the analysts.",
    ),
    (
        "lo-prep-spp",
        {"X": "musician", "P": "by", "Y": "psychiatrist", "V": "offend", "Z": "strategist"},
        "the musician by the psychiatrists offended the strategists.",
        "the musician offended the strategists.",
        "the musician by the psychiatrists is still the musician.",
    ),
    (
        "lo-prep-pss",
        {"X": "administrator", "P": "near", "Y": "penciller", "V": "support", "Z": "lyricist"},
        "the administrators near the penciller supported the lyricist.",
        "the administrators supported the lyricist.",
        "the administrators near the penciller are still the administrators.",
    ),
    (
        "lo-relsubj-who-ppp",
        {"X": "scientist", "V1": "affect", "Y": "colorist", "V2": "help", "Z": "psychotherapist"},
        "the scientists who affected the colorists helped the psychotherapists.",
        "the scientists helped the psychotherapists.",
        "the scientists who affected the colorists are still the scientists.",
    ),
    (
        "lo-relsubj-who-spp",
        {"X": "professor", "V1": "deceive", "Y": "athlete", "V2": "call", "Z": "doctor"},
        "the professor who deceived the athletes called the doctors.",
        "the professor called the doctors.",
        "the professor who deceived the athletes is still the professor.",
    ),
    (
        "lo-prep-pps",
        {"X": "director", "P": "in_front_of", "Y": "analyst", "V": "avoid", "Z": "designer"},
        "the directors in front of the analysts avoided the designer.",
        "the directors avoided the designer.",
        "the directors in front of the analysts are still the directors.",
    ),
    (
        "lo-prep-pss",
        {"X": "chaplain", "P": "near", "Y": "singer", "V": "need", "Z": "author"},
        "the chaplains near the singer needed the author.",
        "the chaplains needed the author.",
        "the chaplains near the singer are still the chaplains.",
    ),
    (
        "lo-relsubj-that-sps",
        {"X": "technician", "V1": "thank", "Y": "planner", "V2": "encourage", "Z": "worker"},
        "the technician that thanked the planners encouraged the worker.",
        "the technician encouraged the worker.",
        "the technician that thanked the planners is still the technician.",
    ),
    (
        "lo-relsubj-that-ppp",
        {"X": "senator", "V1": "recognize", "Y": "nurse", "V2": "recommend", "Z": "chaplain"},
        "the senators that recognized the nurses recommended the chaplains.",
        "the senators recommended the chaplains.",
        "the senators that recognized the nurses are still the senators.",
    ),
]
