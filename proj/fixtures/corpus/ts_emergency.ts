// emergency brake on invalid position
set OBU.position = invalid
stimulate OBU with SendPositionReport
check RBC send Emergency Brake to OBU
