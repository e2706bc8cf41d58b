// linking information consistency, nominal track
set SSB.mode = FS
stimulate Train with EnterSBR
check SSB use linking information
check Train capt Balise Group
