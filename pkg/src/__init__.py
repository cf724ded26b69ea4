# hjsg solver packages
