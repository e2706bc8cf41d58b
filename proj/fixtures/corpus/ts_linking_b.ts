// linking information with an unlinked balise group
set SSB.mode = FS
force Linked balise group list = empty
stimulate Train with PassUnlinked
check SSB use linking information
check Linked balise group list contains ETCS5233
