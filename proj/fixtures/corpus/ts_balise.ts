// telegram content read from the balise
stimulate Train with PassBalise
check balise contains telegram
