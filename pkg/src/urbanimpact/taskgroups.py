"""Predefined skill groupings used as alternatives to k-means skill types.

Two standard aggregations of O*NET workplace skills: the four O*NET task
groups, and the five routineness task types from the skill-content-of-work
literature.  Members are display names; they are matched against the
skill_name column of skills.csv case- and whitespace-insensitively.
"""

TASK_GROUPS: dict[str, list[str]] = {
    "Information Input": [
        "Getting Information",
        "Monitor Processes, Materials, or Surroundings",
        "Identifying Objects, Actions, and Events",
        "Inspecting Equipment, Structures, or Material",
        "Estimating the Quantifiable Characteristics of Products, Events, or Information",
    ],
    "Mental Process": [
        "Judging the Qualities of Things, Services, or People",
        "Processing Information",
        "Evaluating Information to Determine Compliance with Standards",
        "Analyzing Data or Information",
        "Making Decisions and Solving Problems",
        "Thinking Creatively",
        "Updating and Using Relevant Knowledge",
        "Developing Objectives and Strategies",
        "Scheduling Work and Activities",
        "Organizing, Planning, and Prioritizing Work",
    ],
    "Work Output": [
        "Performing General Physical Activities",
        "Handling and Moving Objects",
        "Controlling Machines and Processes",
        "Operating Vehicles, Mechanized Devices, or Equipment",
        "Interacting With Computers",
        "Drafting, Laying Out, and Specifying Technical Devices, Parts, and Equipment",
        "Repairing and Maintaining Mechanical Equipment",
        "Repairing and Maintaining Electronic Equipment",
        "Documenting or Recording Information",
    ],
    "Interacting with Others": [
        "Interpreting the Meaning of Information for Others",
        "Communicating with Supervisors, Peers, or Subordinates",
        "Communicating with Persons Outside Organization",
        "Establishing and Maintaining Interpersonal Relationships",
        "Assisting and Caring for Others",
        "Selling or Influencing Others",
        "Resolving Conflicts and Negotiating with Others",
        "Performing for or Working Directly with the Public",
        "Coordinating the Work and Activities of Others",
        "Developing and Building Teams",
        "Training and Teaching Others",
        "Guiding, Directing, and Motivating Subordinates",
        "Coaching and Developing Others",
        "Provide Consultation and Advice to Others",
        "Performing Administrative Activities",
        "Staffing Organizational Units",
        "Monitoring and Controlling Resources",
    ],
}

ROUTINENESS_TYPES: dict[str, list[str]] = {
    "Non-routine Analytic": [
        "Mathematical Reasoning",
        "Mathematics",
        "Deductive Reasoning",
        "Number Facility",
        "Physics",
        "Programming",
    ],
    "Non-routine Interactive": [
        "Design",
        "Administration and Management",
        "Economics and Accounting",
        "Equipment Selection",
        "Estimating the Quantifiable Characteristics of Products, Events, or Information",
        "Importance of Being Exact or Accurate",
        "Management of Financial Resources",
        "Management of Material Resources",
        "Management of Personnel Resources",
        "Organizing, Planning, and Prioritizing Work",
        "Personnel and Human Resources",
        "Quality Control Analysis",
        "Sales and Marketing",
        "Scheduling Work and Activities",
        "Technology Design",
        "Visualization",
    ],
    "Routine Cognitive": [
        "Consequence of Error",
        "Control Precision",
        "Controlling Machines and Processes",
        "Documenting/Recording Information",
        "Evaluating Information to Determine Compliance with Standards",
        "Inspecting Equipment, Structures, or Material",
        "Operation and Control",
        "Quality Control Analysis",
    ],
    "Routine Manual": [
        "Finger Dexterity",
        "Manual Dexterity",
        "Arm-Hand Steadiness",
        "Wrist-Finger Speed",
    ],
    "Non-routine Manual": [
        "Reaction Time",
        "Response Orientation",
        "Cramped Work Space, Awkward Positions",
        "Dynamic Flexibility",
        "Spatial Orientation",
        "Transportation",
        "Coordination",
    ],
}

PREDEFINED_GROUPINGS = {
    "task-groups": TASK_GROUPS,
    "routineness": ROUTINENESS_TYPES,
}
